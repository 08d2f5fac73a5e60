//! Hitting radii of the graph process `r ↦ G(X; r)` for a fixed sample.
//!
//! `r_i` is the smallest radius without isolated vertices (the largest
//! nearest-neighbour distance) and `r_c` the smallest radius at which the
//! graph is connected (the longest edge of the minimum spanning tree).

use std::f64::consts::PI;

use serde::Serialize;

use crate::dsu::UnionFind;
use crate::geometry::{build_grid, torus_distance, PointSet, MAX_TORUS_DISTANCE};
use crate::rgg::{for_each_edge, grid_for_radius, isolated_in_grid};
use crate::{Error, Result};

fn need_two(ps: &PointSet) -> Result<()> {
    if ps.len() < 2 {
        Err(Error::param("n", "hitting radii need at least two points"))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearestNeighbors {
    pub distances: Vec<f64>,
    pub r_i: f64,
    pub r_i_vertex: usize,
}

/// Nearest-neighbour distance of every vertex by expanding ring search.
pub fn nearest_neighbor_radii(ps: &PointSet) -> Result<NearestNeighbors> {
    need_two(ps)?;
    let n = ps.len();
    let grid = build_grid(ps, (1.5 / (n as f64).sqrt()).clamp(crate::rgg::MIN_GRID_CELL, 1.0))?;
    let m = grid.cells_per_axis() as isize;
    let side = grid.cell_side();

    let mut distances = Vec::with_capacity(n);
    for i in 0..n {
        let p = ps.point(i);
        let (cx, cy) = grid.cell_of(p);
        let (cx, cy) = (cx as isize, cy as isize);
        let mut best = f64::INFINITY;
        let mut k: isize = 0;
        loop {
            if 2 * k + 1 >= m {
                // the rings have met around the torus: finish with a full scan
                for j in (0..n).filter(|&j| j != i) {
                    best = best.min(torus_distance(p, ps.point(j)));
                }
                break;
            }
            for dy in -k..=k {
                let edge_row = dy.abs() == k;
                let step = if edge_row { 1 } else { 2 * k.max(1) };
                let mut dx = -k;
                while dx <= k {
                    let gx = (cx + dx).rem_euclid(m) as usize;
                    let gy = (cy + dy).rem_euclid(m) as usize;
                    for &j in grid.bucket(gx, gy) {
                        let j = j as usize;
                        if j != i {
                            best = best.min(torus_distance(p, ps.point(j)));
                        }
                    }
                    dx += step;
                }
            }
            // anything beyond ring k is at least k cell sides away
            if best <= k as f64 * side {
                break;
            }
            k += 1;
        }
        distances.push(best);
    }
    let (r_i_vertex, r_i) = distances
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (v, d)| if d > acc.1 { (v, d) } else { acc });
    Ok(NearestNeighbors {
        distances,
        r_i,
        r_i_vertex,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bottleneck {
    pub r_c: f64,
    /// The last edge Kruskal needed, `(i, j)` with `i < j`.
    pub r_c_edge: (usize, usize),
}

/// Longest edge of the minimum spanning tree of the sample.
///
/// Kruskal runs over the edges shorter than a search radius `R`, starting
/// from twice the connectivity threshold and doubling until the candidates
/// span the sample. Equal weights are ordered by vertex pair.
pub fn bottleneck_radius(ps: &PointSet) -> Result<Bottleneck> {
    need_two(ps)?;
    let n = ps.len();
    let nf = n as f64;
    let mut reach = 2.0 * (nf.ln() / (PI * nf)).sqrt();
    loop {
        let all_pairs = reach >= MAX_TORUS_DISTANCE;
        let grid = grid_for_radius(ps, reach.min(1.0))?;
        let mut edges: Vec<(f64, u32, u32)> = Vec::new();
        for_each_edge(ps, &grid, reach, |i, j| {
            edges.push((torus_distance(ps.point(i), ps.point(j)), i as u32, j as u32));
        });
        edges.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut uf = UnionFind::new(n);
        let mut last = None;
        for &(w, i, j) in &edges {
            if uf.union(i as usize, j as usize) {
                last = Some((w, i as usize, j as usize));
                if uf.sets() == 1 {
                    break;
                }
            }
        }
        if uf.sets() == 1 {
            let (r_c, i, j) = last.expect("n >= 2 needs at least one tree edge");
            return Ok(Bottleneck { r_c, r_c_edge: (i, j) });
        }
        if all_pairs {
            return Err(Error::Invariant("all pairs considered but graph not spanning".into()));
        }
        reach *= 2.0;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HittingRadii {
    pub r_i: f64,
    pub r_c: f64,
    pub r_i_vertex: usize,
    pub r_c_edge: (usize, usize),
    pub equal: bool,
}

/// Relative tolerance under which `r_c` and `r_i` count as equal.
pub const HITTING_REL_TOL: f64 = 1e-12;

pub fn hitting_radii(ps: &PointSet) -> Result<HittingRadii> {
    let nn = nearest_neighbor_radii(ps)?;
    let b = bottleneck_radius(ps)?;
    let incident = b.r_c_edge.0 == nn.r_i_vertex || b.r_c_edge.1 == nn.r_i_vertex;
    let equal = (incident && b.r_c == nn.r_i) || (b.r_c - nn.r_i).abs() <= HITTING_REL_TOL * b.r_c;
    Ok(HittingRadii {
        r_i: nn.r_i,
        r_c: b.r_c,
        r_i_vertex: nn.r_i_vertex,
        r_c_edge: b.r_c_edge,
        equal,
    })
}

/// The radii `r_lower < r_upper` at `log n ∓ κ` around the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsolatedPairConfig {
    pub kappa: f64,
    pub r_lower: f64,
    pub r_upper: f64,
}

pub const DEFAULT_KAPPA: f64 = 2.0;

impl IsolatedPairConfig {
    pub fn new(n: u64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::param("kappa", "must be positive"));
        }
        let nf = n as f64;
        let l = nf.ln();
        if !(l > kappa) {
            return Err(Error::param("kappa", format!("need log n > kappa, got log n = {l:.4}")));
        }
        Ok(IsolatedPairConfig {
            kappa,
            r_lower: ((l - kappa) / (PI * nf)).sqrt(),
            r_upper: ((l + kappa) / (PI * nf)).sqrt(),
        })
    }
}

/// Pairs of vertices isolated in `G(X; r_lower)` lying within `r_upper` of each other.
pub fn count_close_isolated_pairs(ps: &PointSet, cfg: &IsolatedPairConfig) -> Result<u64> {
    let grid = grid_for_radius(ps, cfg.r_lower)?;
    let isolated = isolated_in_grid(ps, &grid, cfg.r_lower);
    let mut z = 0;
    for (a, &u) in isolated.iter().enumerate() {
        for &v in &isolated[a + 1..] {
            if torus_distance(ps.point(u), ps.point(v)) <= cfg.r_upper {
                z += 1;
            }
        }
    }
    Ok(z)
}
