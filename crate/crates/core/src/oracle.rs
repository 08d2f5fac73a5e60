//! Reference implementations used to cross-check the fast paths.
//!
//! Everything here is deliberately quadratic or worse and shares no code
//! with the grid, union-find or Kruskal routes it checks; only the metric
//! itself is common.

use std::collections::VecDeque;

use crate::analytic::IBetaParams;
use crate::geometry::{torus_distance, PointSet};
use crate::rgg::{build_rgg_bruteforce, ComponentLabeling, GeometricGraph};

/// All `j != i` within `rad` of point `i`, by a full scan.
pub fn neighbors_brute_force(ps: &PointSet, i: usize, rad: f64) -> Vec<usize> {
    (0..ps.len())
        .filter(|&j| j != i && torus_distance(ps.point(i), ps.point(j)) <= rad)
        .collect()
}

/// Component labelling by breadth-first search, canonicalised like
/// [`crate::rgg::components`].
pub fn bfs_components(g: &GeometricGraph) -> ComponentLabeling {
    let n = g.n();
    let mut label = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != u32::MAX {
            continue;
        }
        let l = sizes.len() as u32;
        label[s] = l;
        let mut size = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                if label[w] == u32::MAX {
                    label[w] = l;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    ComponentLabeling { label, sizes }
}

pub fn is_connected(ps: &PointSet, r: f64) -> bool {
    let g = build_rgg_bruteforce(ps, r).expect("non-negative radius");
    bfs_components(&g).sizes.len() == 1
}

/// Connectivity radius by bisection over the sorted pairwise distances.
///
/// The answer is always one of the pairwise distances, so the search runs
/// over that finite set and is exact.
pub fn connectivity_radius_bisection(ps: &PointSet) -> f64 {
    let n = ps.len();
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d.push(torus_distance(ps.point(i), ps.point(j)));
        }
    }
    d.sort_by(f64::total_cmp);
    d.dedup();
    let (mut lo, mut hi) = (0usize, d.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if is_connected(ps, d[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    d[lo]
}

/// Per-vertex nearest-neighbour distance by a full scan.
pub fn nearest_neighbor_brute_force(ps: &PointSet) -> Vec<f64> {
    (0..ps.len())
        .map(|i| {
            (0..ps.len())
                .filter(|&j| j != i)
                .map(|j| torus_distance(ps.point(i), ps.point(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// `I(β)` for `ℓ = 2` from the antiderivative of `x e^{-ax}` on `[0, ε]`.
pub fn i_beta_pair_closed_form(p: IBetaParams) -> f64 {
    assert_eq!(p.ell, 2, "closed form covers pairs only");
    let a = p.beta * (p.n as f64).ln();
    let ae = a * p.epsilon;
    p.prefactor() * (1.0 - (1.0 + ae) * (-ae).exp()) / (a * a)
}
