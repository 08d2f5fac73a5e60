//! Toroidal metric, circular projections and the cell-grid spatial index.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::rgg::RandomSeed;
use crate::{Error, Result};

/// Largest possible torus distance between two points of `[0,1)²`.
pub const MAX_TORUS_DISTANCE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A point of the unit torus, always stored reduced to `[0,1)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

fn reduce(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint {
            x: reduce(x),
            y: reduce(y),
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Shift by `(dx, dy)` modulo 1.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        TorusPoint::new(self.x + dx, self.y + dy)
    }
}

/// The sample: an ordered, non-empty sequence of torus points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<TorusPoint>,
}

impl PointSet {
    pub fn new(points: Vec<TorusPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("n", "a point set needs at least one point"));
        }
        Ok(PointSet { points })
    }

    /// Convenience constructor from raw coordinate pairs (reduced mod 1).
    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().map(|&(x, y)| TorusPoint::new(x, y)).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> TorusPoint {
        self.points[i]
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    /// The sub-sample with the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<PointSet> {
        PointSet::new(indices.iter().map(|&i| self.points[i]).collect())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> PointSet {
        PointSet {
            points: self.points.iter().map(|p| p.translated(dx, dy)).collect(),
        }
    }
}

#[inline]
fn axis_offset(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Euclidean distance on the unit torus.
#[inline]
pub fn torus_distance(p: TorusPoint, q: TorusPoint) -> f64 {
    let dx = axis_offset(p.x, q.x);
    let dy = axis_offset(p.y, q.y);
    (dx * dx + dy * dy).sqrt()
}

/// Circular spread of a set of coordinates on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircularExtent {
    /// `1 - max_gap`: length of the shortest arc holding every value.
    pub extent: f64,
    /// Largest circular gap between cyclically consecutive values.
    pub max_gap: f64,
    /// Index into the input of the value just clockwise of the largest gap.
    pub anchor_index: usize,
}

/// Largest circular gap of `values` and the value right after it.
///
/// Runs in linear time with the bucket argument: with `k` values in `k`
/// equal bins the largest gap is at least `1/k`, so it always spans two
/// bins and only per-bin minima and maxima matter. Ties between equal gaps
/// go to the smaller anchor value, then to the smaller input index.
pub fn circular_extent(values: &[f64]) -> Result<CircularExtent> {
    if values.is_empty() {
        return Err(Error::EmptyProjection);
    }
    let k = values.len();
    let bins = k;
    // per bin: (min value, its index), max value
    let mut lo: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); bins];
    let mut hi: Vec<f64> = vec![f64::NEG_INFINITY; bins];
    for (i, &v) in values.iter().enumerate() {
        let b = ((v * bins as f64) as usize).min(bins - 1);
        if v < lo[b].0 || (v == lo[b].0 && i < lo[b].1) {
            lo[b] = (v, i);
        }
        if v > hi[b] {
            hi[b] = v;
        }
    }
    let occupied: Vec<usize> = (0..bins).filter(|&b| lo[b].1 != usize::MAX).collect();
    let first = occupied[0];
    let last = *occupied.last().unwrap();
    if occupied.len() == 1 && lo[first].0 == hi[first] {
        // all values coincide
        return Ok(CircularExtent {
            extent: 0.0,
            max_gap: 1.0,
            anchor_index: lo[first].1,
        });
    }

    // wrap gap: from the overall maximum around to the overall minimum
    let mut best_gap = (1.0 - hi[last]) + lo[first].0;
    let mut best_anchor = lo[first];
    for w in occupied.windows(2) {
        let (a, b) = (w[0], w[1]);
        let gap = lo[b].0 - hi[a];
        let better = gap > best_gap
            || (gap == best_gap
                && (lo[b].0 < best_anchor.0 || (lo[b].0 == best_anchor.0 && lo[b].1 < best_anchor.1)));
        if better {
            best_gap = gap;
            best_anchor = lo[b];
        }
    }
    Ok(CircularExtent {
        extent: 1.0 - best_gap,
        max_gap: best_gap,
        anchor_index: best_anchor.1,
    })
}

/// Uniform bucket grid over the torus in compressed (CSR) layout.
#[derive(Clone, Debug)]
pub struct CellGrid {
    cells_per_axis: usize,
    cell_side: f64,
    starts: Vec<u32>,
    entries: Vec<u32>,
}

/// Cells per axis above which a grid is refused (memory bound).
pub const MAX_CELLS_PER_AXIS: usize = 1 << 13;

#[inline]
fn axis_cell(v: f64, m: usize) -> usize {
    ((v * m as f64) as usize).min(m - 1)
}

/// Cell indices along one axis within `rings` of `center`, each exactly once.
#[derive(Clone, Copy)]
struct AxisSpan {
    first: usize,
    len: usize,
    m: usize,
}

impl AxisSpan {
    fn new(center: usize, rings: usize, m: usize) -> Self {
        if 2 * rings + 1 >= m {
            AxisSpan { first: 0, len: m, m }
        } else {
            AxisSpan {
                first: (center + m - rings) % m,
                len: 2 * rings + 1,
                m,
            }
        }
    }

    fn iter(self) -> impl Iterator<Item = usize> {
        (0..self.len).map(move |k| (self.first + k) % self.m)
    }
}

impl CellGrid {
    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    /// `(cx, cy)` of the cell holding `p`.
    pub fn cell_of(&self, p: TorusPoint) -> (usize, usize) {
        (
            axis_cell(p.x, self.cells_per_axis),
            axis_cell(p.y, self.cells_per_axis),
        )
    }

    /// Point indices stored in cell `(cx, cy)`, ascending.
    pub fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.cells_per_axis + cx;
        &self.entries[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Positions in [`CellGrid::entries`] of the points stored in cell `(cx, cy)`.
    pub fn bucket_range(&self, cx: usize, cy: usize) -> std::ops::Range<usize> {
        let c = cy * self.cells_per_axis + cx;
        self.starts[c] as usize..self.starts[c + 1] as usize
    }

    /// Point indices in bucket order; every bucket is a contiguous run.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Visit the cells that can hold a point within `rad` of some point of
    /// cell `(cx, cy)`, each exactly once.
    pub fn for_each_cell_near(&self, cx: usize, cy: usize, rad: f64, mut visit: impl FnMut(usize, usize)) {
        let m = self.cells_per_axis;
        // the ring bound of a point query holds wherever the point sits in its cell
        let rings = self.rings_for(rad);
        let xs = AxisSpan::new(cx, rings, m);
        for gy in AxisSpan::new(cy, rings, m).iter() {
            for gx in xs.iter() {
                visit(gx, gy);
            }
        }
    }

    /// Number of rings scanned around the home cell for a query of radius `rad`.
    pub fn rings_for(&self, rad: f64) -> usize {
        (rad / self.cell_side).ceil().max(0.0) as usize
    }

    /// Visit every stored index in the cells that can hold a point within
    /// `rad` of `p`. Each index is visited at most once; the visitor may stop
    /// the scan early by returning `Break`.
    pub fn for_each_candidate<F>(&self, p: TorusPoint, rad: f64, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(usize) -> ControlFlow<()>,
    {
        let m = self.cells_per_axis;
        let (cx, cy) = self.cell_of(p);
        let rings = self.rings_for(rad);
        let xs = AxisSpan::new(cx, rings, m);
        for gy in AxisSpan::new(cy, rings, m).iter() {
            for gx in xs.iter() {
                for &j in self.bucket(gx, gy) {
                    visit(j as usize)?;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// Bucket every point into a grid of `floor(1/cell_side_target)` cells per axis.
pub fn build_grid(ps: &PointSet, cell_side_target: f64) -> Result<CellGrid> {
    if !(cell_side_target > 0.0 && cell_side_target <= 1.0) {
        return Err(Error::param(
            "cell_side_target",
            format!("must lie in (0, 1], got {cell_side_target}"),
        ));
    }
    let m = ((1.0 / cell_side_target).floor() as usize).max(1);
    if m > MAX_CELLS_PER_AXIS {
        return Err(Error::param(
            "cell_side_target",
            format!("{m} cells per axis exceeds the grid cap {MAX_CELLS_PER_AXIS}"),
        ));
    }
    let cells = m * m;
    let mut counts = vec![0u32; cells + 1];
    let home: Vec<u32> = ps
        .points()
        .iter()
        .map(|p| (axis_cell(p.y, m) * m + axis_cell(p.x, m)) as u32)
        .collect();
    for &c in &home {
        counts[c as usize + 1] += 1;
    }
    for c in 0..cells {
        counts[c + 1] += counts[c];
    }
    let mut fill = counts.clone();
    let mut entries = vec![0u32; ps.len()];
    for (i, &c) in home.iter().enumerate() {
        let slot = &mut fill[c as usize];
        entries[*slot as usize] = i as u32;
        *slot += 1;
    }
    Ok(CellGrid {
        cells_per_axis: m,
        cell_side: 1.0 / m as f64,
        starts: counts,
        entries,
    })
}

/// Indices `j != i` with `torus_distance(X_i, X_j) <= rad`, ascending.
pub fn neighbors_within(grid: &CellGrid, ps: &PointSet, i: usize, rad: f64) -> Result<Vec<usize>> {
    if i >= ps.len() {
        return Err(Error::IndexOutOfRange { index: i, n: ps.len() });
    }
    let p = ps.point(i);
    let mut out = Vec::new();
    let _ = grid.for_each_candidate(p, rad, |j| {
        if j != i && torus_distance(p, ps.point(j)) <= rad {
            out.push(j);
        }
        ControlFlow::Continue(())
    });
    out.sort_unstable();
    Ok(out)
}

/// Monte Carlo area estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Hit-or-miss estimate of the area of the union of the closed disks of
/// radius `rad` around `centers`, on the torus.
pub fn disk_union_area_mc(centers: &PointSet, rad: f64, samples: u64, seed: RandomSeed) -> Result<AreaEstimate> {
    if samples == 0 {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let grid = build_grid(centers, rad.clamp(1.0 / 1024.0, 1.0))?;
    let mut rng = seed.rng();
    let mut hits = 0u64;
    for _ in 0..samples {
        let q = TorusPoint::new(rng.next_f64(), rng.next_f64());
        let covered = grid
            .for_each_candidate(q, rad, |j| {
                if torus_distance(q, centers.point(j)) <= rad {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .is_break();
        hits += covered as u64;
    }
    let p = hits as f64 / samples as f64;
    Ok(AreaEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn distance_examples() {
        let d = |a: (f64, f64), b: (f64, f64)| torus_distance(TorusPoint::new(a.0, a.1), TorusPoint::new(b.0, b.1));
        assert!(close(d((0.1, 0.1), (0.9, 0.1)), 0.2, 1e-15));
        assert!(close(d((0.0, 0.0), (0.5, 0.5)), 0.5f64.sqrt(), 1e-15));
        assert!(close(d((0.95, 0.05), (0.05, 0.95)), 0.02f64.sqrt(), 1e-15));
    }

    #[test]
    fn coordinates_are_reduced() {
        let p = TorusPoint::new(-0.25, 1.5);
        assert_eq!((p.x(), p.y()), (0.75, 0.5));
        let q = TorusPoint::new(-1e-18, 1.0);
        assert!(q.x() < 1.0 && q.y() == 0.0);
    }

    #[test]
    fn extent_examples() {
        let e = circular_extent(&[0.1, 0.2, 0.3]).unwrap();
        assert!(close(e.extent, 0.2, 1e-15) && close(e.max_gap, 0.8, 1e-15));
        assert_eq!(e.anchor_index, 0);

        let e = circular_extent(&[0.0, 0.25, 0.5, 0.75]).unwrap();
        assert_eq!((e.extent, e.max_gap, e.anchor_index), (0.75, 0.25, 0));

        let e = circular_extent(&[0.95, 0.05]).unwrap();
        assert!(close(e.extent, 0.1, 1e-15) && close(e.max_gap, 0.9, 1e-15));
        assert_eq!(e.anchor_index, 0);

        let e = circular_extent(&[0.3]).unwrap();
        assert_eq!((e.extent, e.max_gap, e.anchor_index), (0.0, 1.0, 0));

        assert!(matches!(circular_extent(&[]), Err(Error::EmptyProjection)));
    }

    #[test]
    fn extent_tie_prefers_smallest_anchor_then_index() {
        let e = circular_extent(&[0.75, 0.5, 0.25, 0.0]).unwrap();
        assert_eq!(e.anchor_index, 3);
        let e = circular_extent(&[0.4, 0.1, 0.1]).unwrap();
        assert_eq!(e.anchor_index, 1);
    }

    /// Sort-based reference for the bucket algorithm.
    fn extent_by_sorting(values: &[f64]) -> (f64, usize) {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let k = idx.len();
        let mut best = (-1.0, usize::MAX);
        for t in 0..k {
            let cur = idx[t];
            let prev = idx[(t + k - 1) % k];
            let gap = if t == 0 {
                (1.0 - values[prev]) + values[cur]
            } else {
                values[cur] - values[prev]
            };
            if values[cur] == values[prev] && t != 0 {
                continue;
            }
            if gap > best.0 {
                best = (gap, cur);
            }
        }
        if k == 1 || values.iter().all(|&v| v == values[0]) {
            return (1.0, idx[0]);
        }
        best
    }

    #[test]
    fn grid_examples() {
        let ps = PointSet::from_coords(&[(0.5, 0.5)]).unwrap();
        let g = build_grid(&ps, 0.25).unwrap();
        assert_eq!(g.cells_per_axis(), 4);
        assert_eq!(g.bucket(2, 2), &[0]);
        assert!(PointSet::new(vec![]).is_err());
        assert!(build_grid(&ps, 0.0).is_err());
        assert!(build_grid(&ps, -1.0).is_err());

        let seed = RandomSeed::new(3);
        let ps = crate::rgg::sample_points(100, seed).unwrap();
        let g = build_grid(&ps, 0.1).unwrap();
        let mut total = 0;
        for cy in 0..10 {
            for cx in 0..10 {
                for &i in g.bucket(cx, cy) {
                    assert_eq!(g.cell_of(ps.point(i as usize)), (cx, cy));
                }
                total += g.bucket(cx, cy).len();
            }
        }
        assert_eq!(total, 100);
    }

    #[test]
    fn neighbor_examples() {
        let ps = PointSet::from_coords(&[(0.0, 0.0), (0.05, 0.0)]).unwrap();
        let g = build_grid(&ps, 0.1).unwrap();
        assert_eq!(neighbors_within(&g, &ps, 0, 0.1).unwrap(), vec![1]);
        assert!(neighbors_within(&g, &ps, 0, 0.01).unwrap().is_empty());
        assert!(matches!(
            neighbors_within(&g, &ps, 2, 0.1),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn neighbors_match_brute_force_on_random_instances() {
        for inst in 0..50u64 {
            let n = 50 + (inst as usize * 5) % 251;
            let ps = crate::rgg::sample_points(n, RandomSeed::new(1000 + inst)).unwrap();
            for &rad in &[0.0f64, 0.013, 0.05, 0.2, 0.7] {
                let g = build_grid(&ps, rad.clamp(1.0 / 1024.0, 1.0)).unwrap();
                for i in (0..n).step_by(7) {
                    let fast = neighbors_within(&g, &ps, i, rad).unwrap();
                    let slow = crate::oracle::neighbors_brute_force(&ps, i, rad);
                    assert_eq!(fast, slow, "instance {inst}, rad {rad}, i {i}");
                }
                // a coarser grid than the radius exercises multi-ring scans
                let coarse = build_grid(&ps, 0.01).unwrap();
                let fine_i = n / 2;
                assert_eq!(
                    neighbors_within(&coarse, &ps, fine_i, rad).unwrap(),
                    crate::oracle::neighbors_brute_force(&ps, fine_i, rad)
                );
            }
        }
    }

    #[test]
    fn single_disk_area() {
        let ps = PointSet::from_coords(&[(0.3, 0.7)]).unwrap();
        let a = disk_union_area_mc(&ps, 0.1, 1_000_000, RandomSeed::new(11)).unwrap();
        let exact = std::f64::consts::PI * 0.01;
        assert!((a.estimate - exact).abs() <= 3.0 * a.std_error, "{a:?}");
    }

    #[test]
    fn disjoint_and_coincident_disks() {
        let pi = std::f64::consts::PI;
        let ps = PointSet::from_coords(&[(0.2, 0.2), (0.7, 0.6)]).unwrap();
        let a = disk_union_area_mc(&ps, 0.1, 400_000, RandomSeed::new(12)).unwrap();
        assert!((a.estimate - 2.0 * pi * 0.01).abs() <= 3.0 * a.std_error, "{a:?}");

        // disks straddling the seam are still whole disks
        let ps = PointSet::from_coords(&[(0.99, 0.01), (0.99, 0.01)]).unwrap();
        let a = disk_union_area_mc(&ps, 0.1, 400_000, RandomSeed::new(13)).unwrap();
        assert!((a.estimate - pi * 0.01).abs() <= 3.0 * a.std_error, "{a:?}");
    }

    #[test]
    fn single_disk_error_scales_with_samples() {
        let exact = std::f64::consts::PI * 0.0025;
        let ps = PointSet::from_coords(&[(0.5, 0.5)]).unwrap();
        let mut within = 0;
        for run in 0..100 {
            let a = disk_union_area_mc(&ps, 0.05, 20_000, RandomSeed::new(500 + run)).unwrap();
            if (a.estimate - exact).abs() < 4.0 * a.std_error {
                within += 1;
            }
        }
        assert!(within >= 99, "{within}/100");
    }

    proptest! {
        #[test]
        fn metric_axioms(ax in 0.0..1.0f64, ay in 0.0..1.0f64, bx in 0.0..1.0f64,
                         by in 0.0..1.0f64, cx in 0.0..1.0f64, cy in 0.0..1.0f64) {
            let a = TorusPoint::new(ax, ay);
            let b = TorusPoint::new(bx, by);
            let c = TorusPoint::new(cx, cy);
            prop_assert_eq!(torus_distance(a, b), torus_distance(b, a));
            prop_assert!(torus_distance(a, c) <= torus_distance(a, b) + torus_distance(b, c) + 1e-12);
            prop_assert!(torus_distance(a, b) <= MAX_TORUS_DISTANCE);
            prop_assert_eq!(torus_distance(a, a), 0.0);
        }

        #[test]
        fn extent_matches_sorting_and_sums_to_one(values in prop::collection::vec(0.0..1.0f64, 1..60)) {
            let e = circular_extent(&values).unwrap();
            let (gap, anchor) = extent_by_sorting(&values);
            prop_assert_eq!(e.max_gap, gap);
            prop_assert_eq!(values[e.anchor_index], values[anchor]);
            prop_assert!((e.extent + e.max_gap - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn extent_is_translation_invariant(values in prop::collection::vec(0.0..1.0f64, 2..40), shift in 0.0..1.0f64) {
            let e = circular_extent(&values).unwrap();
            let moved: Vec<f64> = values.iter().map(|&v| reduce(v + shift)).collect();
            let f = circular_extent(&moved).unwrap();
            prop_assert!((e.max_gap - f.max_gap).abs() <= 1e-12);
            prop_assert!((e.extent - f.extent).abs() <= 1e-12);
            // the anchor follows the translation unless two gaps are within rounding of each other
            let mut gaps: Vec<f64> = {
                let mut s = values.clone();
                s.sort_by(f64::total_cmp);
                let mut g: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
                g.push(1.0 - s[s.len() - 1] + s[0]);
                g
            };
            gaps.sort_by(|a, b| b.total_cmp(a));
            if gaps[0] - gaps[1] > 1e-9 {
                prop_assert_eq!(moved[e.anchor_index], moved[f.anchor_index]);
            }
        }
    }
}
