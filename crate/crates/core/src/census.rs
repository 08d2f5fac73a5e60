//! Component classification and the component counters of one sample.
//!
//! A component is *embeddable* when a translation maps it into
//! `[r, 1-r]²`, i.e. both coordinate projections leave a circular gap of at
//! least `2r`. A non-embeddable component is *solitary* when it leaves no
//! room for any other non-embeddable component; this is decided
//! conservatively by checking whether the cells far from the component
//! contain a chain that wraps around the torus.
//!
//! Counters, for `ℓ = 1..=ell_max`:
//!
//! * `k_exact[ℓ]`: components with exactly `ℓ` vertices,
//! * `k_prime[ℓ]`: those that are embeddable and have every vertex within
//!   `ε r` of their leftmost vertex,
//! * `k_tilde[ℓ]`: components with at least `ℓ` vertices that are not solitary.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::geometry::{build_grid, circular_extent, torus_distance, PointSet, TorusPoint};
use crate::rgg::label_components;
use crate::{Error, Result};

/// Components up to this size get an exact all-pairs diameter.
pub const EXACT_DIAMETER_CAP: usize = 512;

/// Cells per axis above which the solitary test refuses to tessellate.
pub const MAX_FREE_CELLS_PER_AXIS: usize = 8192;

/// Default divisor `D` of the small/dense split `size <= log n / D`.
pub const DEFAULT_TYPE_SPLIT_DIVISOR: f64 = 37.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub vertex_ids: Vec<usize>,
    pub size: usize,
    /// Largest pairwise torus distance; an upper bound when `diameter_exact` is false.
    pub diameter: f64,
    pub diameter_exact: bool,
    pub x_extent: f64,
    pub y_extent: f64,
    pub x_gap: f64,
    pub y_gap: f64,
    pub embeddable: bool,
    pub solitary: bool,
    pub leftmost_vertex: usize,
    pub rho_from_leftmost: f64,
}

/// Geometry of one component (members are not re-checked for connectivity).
pub fn summarize_component(ps: &PointSet, members: &[usize], r: f64) -> Result<ComponentSummary> {
    if members.is_empty() {
        return Err(Error::param("members", "a component has at least one vertex"));
    }
    let xs: Vec<f64> = members.iter().map(|&v| ps.point(v).x()).collect();
    let ys: Vec<f64> = members.iter().map(|&v| ps.point(v).y()).collect();
    let ex = circular_extent(&xs)?;
    let ey = circular_extent(&ys)?;

    // leftmost: the x-gap anchor; equal x coordinates resolved by smaller y, then index
    let anchor_x = xs[ex.anchor_index];
    let leftmost = members
        .iter()
        .copied()
        .filter(|&v| ps.point(v).x() == anchor_x)
        .min_by(|&a, &b| ps.point(a).y().total_cmp(&ps.point(b).y()).then(a.cmp(&b)))
        .expect("anchor is a member");
    let lp = ps.point(leftmost);
    let rho = members
        .iter()
        .map(|&v| torus_distance(lp, ps.point(v)))
        .fold(0.0, f64::max);

    let (diameter, diameter_exact) = if members.len() <= EXACT_DIAMETER_CAP {
        let mut d: f64 = 0.0;
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                d = d.max(torus_distance(ps.point(u), ps.point(v)));
            }
        }
        (d, true)
    } else {
        // two members of an arc of length e are at most min(e, 1/2) apart on that axis
        let dx = ex.extent.min(0.5);
        let dy = ey.extent.min(0.5);
        ((dx * dx + dy * dy).sqrt().min(2.0 * rho), false)
    };

    Ok(ComponentSummary {
        vertex_ids: members.to_vec(),
        size: members.len(),
        diameter,
        diameter_exact,
        x_extent: ex.extent,
        y_extent: ey.extent,
        x_gap: ex.max_gap,
        y_gap: ey.max_gap,
        embeddable: ex.max_gap >= 2.0 * r && ey.max_gap >= 2.0 * r,
        solitary: false,
        leftmost_vertex: leftmost,
        rho_from_leftmost: rho,
    })
}

/// Union-find over cells that tracks each cell's integer displacement from
/// its root, so that closing a loop with non-zero net displacement (a loop
/// around the torus) is detected.
struct WrapDetector {
    parent: Vec<u32>,
    offset: Vec<(i64, i64)>,
    path: Vec<u32>,
}

impl WrapDetector {
    fn new(n: usize) -> Self {
        WrapDetector {
            parent: (0..n as u32).collect(),
            offset: vec![(0, 0); n],
            path: Vec::new(),
        }
    }

    fn find(&mut self, x: usize) -> (usize, (i64, i64)) {
        let mut v = x;
        while self.parent[v] as usize != v {
            self.path.push(v as u32);
            v = self.parent[v] as usize;
        }
        let root = v;
        while let Some(u) = self.path.pop() {
            let u = u as usize;
            let p = self.parent[u] as usize;
            if p != root {
                let po = self.offset[p];
                self.offset[u].0 += po.0;
                self.offset[u].1 += po.1;
                self.parent[u] = root as u32;
            }
        }
        (root, self.offset[x])
    }

    /// Record `pos(b) = pos(a) + d`; returns true if this closes a wrapping loop.
    fn join(&mut self, a: usize, b: usize, d: (i64, i64)) -> bool {
        let (ra, oa) = self.find(a);
        let (rb, ob) = self.find(b);
        if ra == rb {
            return (oa.0 + d.0, oa.1 + d.1) != ob;
        }
        self.parent[rb] = ra as u32;
        self.offset[rb] = (oa.0 + d.0 - ob.0, oa.1 + d.1 - ob.1);
        false
    }
}

/// Conservative solitary test for a non-embeddable component.
///
/// The torus is cut into square cells of side about `alpha_cell * r`. A cell
/// is free when its centre is farther than `r` plus half the cell diagonal
/// from every member, so the whole cell is out of reach of the component.
/// The component is solitary iff the free cells (4-neighbourhood, toroidal)
/// hold no chain wrapping around the torus. Embeddable components are never
/// solitary.
pub fn is_solitary(ps: &PointSet, summary: &ComponentSummary, r: f64, alpha_cell: f64) -> Result<bool> {
    if !(alpha_cell > 0.0 && alpha_cell < 1.0) {
        return Err(Error::param("alpha_cell", format!("must lie in (0, 1), got {alpha_cell}")));
    }
    if summary.embeddable {
        return Ok(false);
    }
    if r <= 0.0 {
        return Err(Error::param("r", "the solitary test needs a positive radius"));
    }
    let m = (1.0 / (alpha_cell * r)).ceil() as usize;
    if m > MAX_FREE_CELLS_PER_AXIS {
        return Err(Error::param(
            "r",
            format!("solitary tessellation needs {m} cells per axis (cap {MAX_FREE_CELLS_PER_AXIS})"),
        ));
    }
    let side = 1.0 / m as f64;
    let reach = r + side * std::f64::consts::SQRT_2 / 2.0;

    let members = ps.subset(&summary.vertex_ids)?;
    // buckets with diagonal below `reach`, so a member sharing the centre's
    // bucket almost always settles the cell without a ring scan
    let grid = build_grid(&members, (reach / std::f64::consts::SQRT_2).clamp(crate::rgg::MIN_GRID_CELL, 1.0))?;

    let mut slot = vec![u32::MAX; m * m];
    let mut free = 0u32;
    for cy in 0..m {
        for cx in 0..m {
            let c = TorusPoint::new((cx as f64 + 0.5) * side, (cy as f64 + 0.5) * side);
            let (hx, hy) = grid.cell_of(c);
            let near = |j: &u32| torus_distance(c, members.point(*j as usize)) <= reach;
            let covered = grid.bucket(hx, hy).iter().any(near)
                || grid
                .for_each_candidate(c, reach, |j| {
                    if torus_distance(c, members.point(j)) <= reach {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                })
                .is_break();
            if !covered {
                slot[cy * m + cx] = free;
                free += 1;
            }
        }
    }
    if free == 0 {
        return Ok(true);
    }

    let mut wraps = WrapDetector::new(free as usize);
    for cy in 0..m {
        for cx in 0..m {
            let a = slot[cy * m + cx];
            if a == u32::MAX {
                continue;
            }
            let right = slot[cy * m + (cx + 1) % m];
            if right != u32::MAX && wraps.join(a as usize, right as usize, (1, 0)) {
                return Ok(false);
            }
            let up = slot[((cy + 1) % m) * m + cx];
            if up != u32::MAX && wraps.join(a as usize, up as usize, (0, 1)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub epsilon: f64,
    pub ell_max: usize,
    pub alpha_cell: f64,
    pub type_split_divisor: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            epsilon: 0.4,
            ell_max: 3,
            alpha_cell: 0.2,
            type_split_divisor: DEFAULT_TYPE_SPLIT_DIVISOR,
        }
    }
}

impl CensusConfig {
    pub fn new(epsilon: f64, ell_max: usize) -> Result<Self> {
        let cfg = CensusConfig {
            epsilon,
            ell_max,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if self.ell_max < 2 {
            return Err(Error::param("ell_max", "must be at least 2"));
        }
        if !(self.alpha_cell > 0.0 && self.alpha_cell < 1.0) {
            return Err(Error::param("alpha_cell", format!("must lie in (0, 1), got {}", self.alpha_cell)));
        }
        if !(self.type_split_divisor > 0.0) {
            return Err(Error::param("type_split_divisor", "must be positive"));
        }
        Ok(())
    }
}

/// Counts of the four component types that can make `K̃_ℓ` exceed `K'_{ε,ℓ}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCounts {
    /// Diameter at most `εr`, size in `(ℓ, log n / D]`.
    pub small: u64,
    /// Diameter at most `εr`, size above `log n / D`.
    pub dense: u64,
    /// Embeddable with diameter above `εr`.
    pub wide: u64,
    /// Neither embeddable nor solitary.
    pub wrapping: u64,
}

impl TypeCounts {
    pub fn total(&self) -> u64 {
        self.small + self.dense + self.wide + self.wrapping
    }
}

/// Assign every non-solitary component that is larger than `ell` or wider
/// than `ε r` to exactly one type.
pub fn classify_types(summaries: &[ComponentSummary], r: f64, cfg: &CensusConfig, ell: usize) -> TypeCounts {
    let n: usize = summaries.iter().map(|s| s.size).sum();
    let split = (n as f64).ln() / cfg.type_split_divisor;
    let narrow = cfg.epsilon * r;
    let mut t = TypeCounts::default();
    for s in summaries.iter().filter(|s| !s.solitary) {
        if !s.embeddable {
            t.wrapping += 1;
        } else if s.diameter > narrow {
            t.wide += 1;
        } else if s.size > ell {
            if s.size as f64 <= split {
                t.small += 1;
            } else {
                t.dense += 1;
            }
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCensus {
    pub n: usize,
    pub ell_max: usize,
    pub k1: u64,
    /// Indexed by ℓ in `0..=ell_max`; slot 0 is unused.
    pub k_exact: Vec<u64>,
    /// Components with more than `ell_max` vertices.
    pub k_overflow: u64,
    pub k_prime: Vec<u64>,
    pub k_tilde: Vec<u64>,
    /// Indexed by ℓ; slots below 2 are empty.
    pub type_counts: Vec<TypeCounts>,
    pub solitary_count: u32,
    pub has_solitary: bool,
}

impl ComponentCensus {
    pub fn k_exact(&self, ell: usize) -> u64 {
        self.k_exact[ell]
    }

    pub fn k_prime(&self, ell: usize) -> u64 {
        self.k_prime[ell]
    }

    pub fn k_tilde(&self, ell: usize) -> u64 {
        self.k_tilde[ell]
    }

    /// Check `K'_{ε,ℓ} <= K_ℓ <= K̃_ℓ` for every ℓ and that sizes add up to `n`.
    pub fn check_counter_order(&self) -> Result<()> {
        for ell in 1..=self.ell_max {
            if !(self.k_prime[ell] <= self.k_exact[ell] && self.k_exact[ell] <= self.k_tilde[ell]) {
                return Err(Error::Invariant(format!(
                    "counter order fails at ell={ell}: K'={} K={} K~={}",
                    self.k_prime[ell], self.k_exact[ell], self.k_tilde[ell]
                )));
            }
        }
        Ok(())
    }
}

/// Summaries of every component of `G(X; r)`, solitary flags included.
pub fn summarize_all(ps: &PointSet, r: f64, cfg: &CensusConfig) -> Result<Vec<ComponentSummary>> {
    cfg.validate()?;
    let labeling = label_components(ps, r)?;
    let mut summaries = Vec::with_capacity(labeling.num_components());
    for members in labeling.groups() {
        let mut s = summarize_component(ps, &members, r)?;
        if !s.embeddable {
            s.solitary = is_solitary(ps, &s, r, cfg.alpha_cell)?;
        }
        summaries.push(s);
    }
    Ok(summaries)
}

/// Counters from precomputed summaries.
pub fn census_from_summaries(summaries: &[ComponentSummary], r: f64, cfg: &CensusConfig) -> ComponentCensus {
    let lmax = cfg.ell_max;
    let mut c = ComponentCensus {
        n: summaries.iter().map(|s| s.size).sum(),
        ell_max: lmax,
        k1: 0,
        k_exact: vec![0; lmax + 1],
        k_overflow: 0,
        k_prime: vec![0; lmax + 1],
        k_tilde: vec![0; lmax + 1],
        type_counts: vec![TypeCounts::default(); lmax + 1],
        solitary_count: 0,
        has_solitary: false,
    };
    let narrow = cfg.epsilon * r;
    for s in summaries {
        if s.size <= lmax {
            c.k_exact[s.size] += 1;
            if s.embeddable && s.rho_from_leftmost <= narrow {
                c.k_prime[s.size] += 1;
            }
        } else {
            c.k_overflow += 1;
        }
        if s.solitary {
            c.solitary_count += 1;
        } else {
            for ell in 1..=lmax.min(s.size) {
                c.k_tilde[ell] += 1;
            }
        }
    }
    c.k1 = c.k_exact[1];
    c.has_solitary = c.solitary_count > 0;
    for ell in 2..=lmax {
        c.type_counts[ell] = classify_types(summaries, r, cfg, ell);
    }
    c
}

/// Build `G(X; r)`, summarise its components and count them.
pub fn census(ps: &PointSet, r: f64, cfg: &CensusConfig) -> Result<ComponentCensus> {
    let summaries = summarize_all(ps, r, cfg)?;
    Ok(census_from_summaries(&summaries, r, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgg::{sample_points, RandomSeed};

    fn pts(c: &[(f64, f64)]) -> PointSet {
        PointSet::from_coords(c).unwrap()
    }

    fn ring(y: f64, count: usize) -> Vec<(f64, f64)> {
        (0..count).map(|k| (k as f64 / count as f64, y)).collect()
    }

    #[test]
    fn singleton_summary() {
        let ps = pts(&[(0.3, 0.4)]);
        let s = summarize_component(&ps, &[0], 0.05).unwrap();
        assert_eq!((s.size, s.diameter, s.x_gap, s.y_gap), (1, 0.0, 1.0, 1.0));
        assert!(s.embeddable && !s.solitary);
        assert!(summarize_component(&ps, &[], 0.05).is_err());
    }

    #[test]
    fn small_cluster_summary() {
        let ps = pts(&[(0.50, 0.50), (0.505, 0.50), (0.50, 0.505)]);
        let s = summarize_component(&ps, &[0, 1, 2], 0.02).unwrap();
        assert!(s.embeddable);
        assert_eq!(s.leftmost_vertex, 0);
        // brute force: distances from vertex 0 are 0.005 and 0.005
        let brute = (1..3).map(|v| torus_distance(ps.point(0), ps.point(v))).fold(0.0, f64::max);
        assert_eq!(s.rho_from_leftmost, brute);
        assert!((s.rho_from_leftmost - 0.005).abs() < 1e-12);
        assert!((s.diameter - 0.005 * 2f64.sqrt()).abs() < 1e-12);
        assert!(s.rho_from_leftmost <= s.diameter && s.diameter <= 2.0 * s.rho_from_leftmost);
    }

    #[test]
    fn leftmost_crosses_the_seam() {
        let ps = pts(&[(0.01, 0.5), (0.99, 0.5), (0.995, 0.51)]);
        let s = summarize_component(&ps, &[0, 1, 2], 0.05).unwrap();
        assert_eq!(s.leftmost_vertex, 1);
        assert!(s.embeddable);
    }

    #[test]
    fn wrapping_ring_is_not_embeddable() {
        let ps = pts(&ring(0.5, 40));
        let all: Vec<usize> = (0..40).collect();
        let s = summarize_component(&ps, &all, 0.03).unwrap();
        assert!((s.x_gap - 0.025).abs() < 1e-12);
        assert!(!s.embeddable);
        // one ring leaves a wrapping free band above it
        assert!(!is_solitary(&ps, &s, 0.03, 0.2).unwrap());
    }

    #[test]
    fn three_rings_leave_free_bands() {
        let r = 0.05;
        let mut c = ring(1.0 / 6.0, 25);
        c.extend(ring(0.5, 25));
        c.extend(ring(5.0 / 6.0, 25));
        let ps = pts(&c);
        let all: Vec<usize> = (0..ps.len()).collect();
        let s = summarize_component(&ps, &all, r).unwrap();
        assert!(!s.embeddable);
        assert!(!is_solitary(&ps, &s, r, 0.2).unwrap());
    }

    #[test]
    fn dense_grid_is_solitary() {
        let r = 0.05;
        let k = 40; // spacing 0.025 = r/2
        let c: Vec<(f64, f64)> = (0..k * k)
            .map(|i| ((i % k) as f64 / k as f64, (i / k) as f64 / k as f64))
            .collect();
        let ps = pts(&c);
        let all: Vec<usize> = (0..ps.len()).collect();
        let s = summarize_component(&ps, &all, r).unwrap();
        assert!(!s.embeddable);
        assert!(is_solitary(&ps, &s, r, 0.2).unwrap());
        assert!(is_solitary(&ps, &s, r, 1.0).is_err());
        assert!(is_solitary(&ps, &s, r, 0.0).is_err());
    }

    #[test]
    fn grid_with_a_hole_is_still_solitary() {
        let r = 0.05;
        let k = 40;
        let c: Vec<(f64, f64)> = (0..k * k)
            .map(|i| ((i % k) as f64 / k as f64, (i / k) as f64 / k as f64))
            .filter(|&(x, y)| (x - 0.5).hypot(y - 0.5) > 0.2)
            .collect();
        let ps = pts(&c);
        let all: Vec<usize> = (0..ps.len()).collect();
        let s = summarize_component(&ps, &all, r).unwrap();
        assert!(is_solitary(&ps, &s, r, 0.2).unwrap());
    }

    #[test]
    fn wrap_detector_flags_noncontractible_loops() {
        // a 1x3 row of cells joined cyclically wraps once
        let mut w = WrapDetector::new(3);
        assert!(!w.join(0, 1, (1, 0)));
        assert!(!w.join(1, 2, (1, 0)));
        assert!(w.join(2, 0, (1, 0)));
        // a 2x2 square is contractible
        let mut w = WrapDetector::new(4);
        assert!(!w.join(0, 1, (1, 0)));
        assert!(!w.join(0, 2, (0, 1)));
        assert!(!w.join(1, 3, (0, 1)));
        assert!(!w.join(2, 3, (1, 0)));
    }

    #[test]
    fn census_examples() {
        let cfg = CensusConfig::new(0.25, 3).unwrap();
        let ps = pts(&[(0.5, 0.5), (0.501, 0.5), (0.1, 0.1), (0.8, 0.2)]);
        let c = census(&ps, 0.01, &cfg).unwrap();
        assert_eq!(c.k1, 2);
        assert_eq!(c.k_exact(2), 1);
        assert_eq!(c.k_prime(2), 1);
        assert_eq!(c.k_tilde(2), 1);
        c.check_counter_order().unwrap();

        let cfg5 = CensusConfig::new(0.25, 6).unwrap();
        let five = pts(&[(0.5, 0.5), (0.51, 0.5), (0.5, 0.51), (0.51, 0.51), (0.505, 0.505)]);
        let c = census(&five, 0.05, &cfg5).unwrap();
        assert_eq!(c.k_exact(5), 1);
        assert!((1..=5).all(|l| c.k_tilde(l) == 1));
        assert_eq!(c.k_tilde(6), 0);

        let c = census(&pts(&[(0.2, 0.2)]), 0.05, &cfg).unwrap();
        assert_eq!(c.k1, 1);
        assert_eq!(c.k_exact[2..], [0, 0]);
        assert_eq!(c.k_prime[2..], [0, 0]);
        assert_eq!(c.k_tilde[2..], [0, 0]);
        assert_eq!(c.k_overflow, 0);
    }

    #[test]
    fn config_validation() {
        assert!(CensusConfig::new(0.5, 3).is_err());
        assert!(CensusConfig::new(0.0, 3).is_err());
        assert!(CensusConfig::new(0.2, 1).is_err());
        assert!(CensusConfig::new(0.49, 2).is_ok());
    }

    #[test]
    fn type_examples() {
        let r = 0.05;
        let cfg = CensusConfig::new(0.4, 3).unwrap();

        // wrapping, non-solitary ring plus a far singleton
        let mut c = ring(0.5, 40);
        c.push((0.2, 0.1));
        let ps = pts(&c);
        let s = summarize_all(&ps, r, &cfg).unwrap();
        assert_eq!(classify_types(&s, r, &cfg, 2).wrapping, 1);

        // a pair 0.9 r apart: diameter above εr and embeddable
        let ps = pts(&[(0.3, 0.3), (0.3 + 0.9 * r, 0.3)]);
        let s = summarize_all(&ps, r, &cfg).unwrap();
        let t = classify_types(&s, r, &cfg, 2);
        assert_eq!((t.wide, t.total()), (1, 1));

        // a clique of size ℓ+1 inside εr, with a split divisor low enough that
        // ℓ+1 <= log n / D at this n
        let small_cfg = CensusConfig {
            type_split_divisor: 1.0,
            ..cfg
        };
        let mut c = vec![(0.5, 0.5), (0.505, 0.5), (0.5, 0.505)];
        c.extend((0..30).map(|k| (0.02 + 0.06 * (k % 6) as f64, 0.02 + 0.06 * (k / 6) as f64)));
        let ps = pts(&c);
        let s = summarize_all(&ps, r, &small_cfg).unwrap();
        let t = classify_types(&s, r, &small_cfg, 2);
        assert_eq!((t.small, t.dense, t.total()), (1, 0, 1));
        // with the default divisor the same clique is dense
        let t = classify_types(&s, r, &cfg, 2);
        assert_eq!((t.small, t.dense), (0, 1));
    }

    #[test]
    fn random_instance_invariants() {
        let cfg = CensusConfig::new(0.4, 4).unwrap();
        let n = 2000;
        let r = ((n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt();
        for seed in 0..60 {
            let ps = sample_points(n, RandomSeed::new(seed)).unwrap();
            let sums = summarize_all(&ps, r, &cfg).unwrap();
            let c = census_from_summaries(&sums, r, &cfg);
            c.check_counter_order().unwrap();
            assert!(c.solitary_count <= 1);
            for ell in 2..cfg.ell_max {
                assert!(c.k_tilde(ell) >= c.k_tilde(ell + 1));
            }
            let total: usize = sums.iter().map(|s| s.size).sum();
            assert_eq!(total, n);
            for s in &sums {
                if s.size <= cfg.ell_max && s.embeddable && s.rho_from_leftmost <= cfg.epsilon * r {
                    let lp = ps.point(s.leftmost_vertex);
                    assert!(s.vertex_ids.iter().all(|&v| torus_distance(lp, ps.point(v)) <= cfg.epsilon * r));
                }
                if s.solitary {
                    assert!(!s.embeddable);
                }
                if s.embeddable && s.diameter_exact {
                    assert!(s.rho_from_leftmost <= s.diameter && s.diameter <= 2.0 * s.rho_from_leftmost + 1e-15);
                }
            }
            for ell in 2..=cfg.ell_max {
                let m = c.type_counts[ell].total();
                assert!(c.k_tilde(ell) - c.k_prime(ell) <= m, "seed {seed} ell {ell}");
            }
            // embeddability does not depend on where the sample sits
            let moved = ps.translated(0.37, 0.81);
            let sums2 = summarize_all(&moved, r, &cfg).unwrap();
            let flags = |v: &[ComponentSummary]| v.iter().map(|s| (s.size, s.embeddable)).collect::<Vec<_>>();
            assert_eq!(flags(&sums), flags(&sums2));
        }
    }
}
