//! Sampling of the point set, construction of `G(X; r)` and component labelling.

use std::ops::ControlFlow;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::dsu::UnionFind;
use crate::geometry::{build_grid, torus_distance, CellGrid, PointSet, TorusPoint};
use crate::{Error, Result};

/// Smallest grid cell used for graph construction; bounds the grid to 1024² cells.
pub const MIN_GRID_CELL: f64 = 1.0 / 1024.0;

/// SplitMix64 output function applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Master seed of a run. Trial `k` draws from `SplitMix64(master ^ k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub master: u64,
}

impl RandomSeed {
    pub const fn new(master: u64) -> Self {
        RandomSeed { master }
    }

    /// Seed of trial `k`; pure in `(master, k)`.
    pub fn trial(self, k: u64) -> RandomSeed {
        RandomSeed::new(splitmix64(self.master ^ k))
    }

    /// The uniform stream keyed by this seed (xoshiro256++, SplitMix64-seeded).
    pub fn rng(self) -> UniformStream {
        UniformStream(Xoshiro256PlusPlus::seed_from_u64(self.master))
    }
}

/// Uniform doubles in `[0,1)` with 53 random mantissa bits.
pub struct UniformStream(Xoshiro256PlusPlus);

impl UniformStream {
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

/// `n` i.i.d. uniform points on the torus; bit-identical for equal `(n, seed)`.
pub fn sample_points(n: usize, seed: RandomSeed) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::param("n", "need at least one point"));
    }
    let mut rng = seed.rng();
    let points = (0..n)
        .map(|_| {
            let x = rng.next_f64();
            let y = rng.next_f64();
            TorusPoint::new(x, y)
        })
        .collect();
    PointSet::new(points)
}

/// `G(X; r)`: vertices are the sample indices, edges join points at torus
/// distance at most `radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricGraph {
    radius: f64,
    adjacency: Vec<Vec<usize>>,
}

impl GeometricGraph {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Ascending neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("r", format!("radius must be non-negative, got {r}")))
    }
}

pub(crate) fn grid_for_radius(ps: &PointSet, r: f64) -> Result<CellGrid> {
    build_grid(ps, r.clamp(MIN_GRID_CELL, 1.0))
}

/// Call `f(i, j)` once for every pair `i < j` at distance at most `r`.
pub(crate) fn for_each_edge(ps: &PointSet, grid: &CellGrid, r: f64, mut f: impl FnMut(usize, usize)) {
    for i in 0..ps.len() {
        let p = ps.point(i);
        let _ = grid.for_each_candidate(p, r, |j| {
            if j > i && torus_distance(p, ps.point(j)) <= r {
                f(i, j);
            }
            ControlFlow::Continue(())
        });
    }
}

/// Grid-accelerated construction; expected time `O(n + edges)`.
pub fn build_rgg(ps: &PointSet, r: f64) -> Result<GeometricGraph> {
    check_radius(r)?;
    let grid = grid_for_radius(ps, r)?;
    let mut adjacency = vec![Vec::new(); ps.len()];
    for_each_edge(ps, &grid, r, |i, j| {
        adjacency[i].push(j);
        adjacency[j].push(i);
    });
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Ok(GeometricGraph { radius: r, adjacency })
}

/// All-pairs construction, used as the reference for [`build_rgg`].
pub fn build_rgg_bruteforce(ps: &PointSet, r: f64) -> Result<GeometricGraph> {
    check_radius(r)?;
    let n = ps.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if torus_distance(ps.point(i), ps.point(j)) <= r {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    Ok(GeometricGraph { radius: r, adjacency })
}

/// Component label per vertex; labels follow the smallest vertex of each component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentLabeling {
    pub label: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn num_components(&self) -> usize {
        self.sizes.len()
    }

    fn from_union_find(uf: &mut UnionFind) -> Self {
        Self::from_roots(uf.len(), |v| uf.find(v))
    }

    /// Labels numbered in order of each component's smallest vertex.
    fn from_roots(n: usize, mut root_of: impl FnMut(usize) -> usize) -> Self {
        let mut root_label = vec![u32::MAX; n];
        let mut label = vec![0u32; n];
        let mut sizes = Vec::new();
        for v in 0..n {
            let root = root_of(v);
            if root_label[root] == u32::MAX {
                root_label[root] = sizes.len() as u32;
                sizes.push(0);
            }
            let l = root_label[root];
            label[v] = l;
            sizes[l as usize] += 1;
        }
        ComponentLabeling { label, sizes }
    }

    /// Members of every component, ascending, indexed by label.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &l) in self.label.iter().enumerate() {
            groups[l as usize].push(v);
        }
        groups
    }
}

/// Connected components of `g` by union-find over its edges.
pub fn components(g: &GeometricGraph) -> ComponentLabeling {
    let mut uf = UnionFind::new(g.n());
    for (i, adj) in g.adjacency.iter().enumerate() {
        for &j in adj.iter().filter(|&&j| j > i) {
            uf.union(i, j);
        }
    }
    ComponentLabeling::from_union_find(&mut uf)
}

/// Components of `G(X; r)` without materialising adjacency lists.
///
/// Works on a copy of the points laid out in grid-bucket order, so that the
/// pairs of neighbouring cells are scanned over contiguous memory.
pub fn label_components(ps: &PointSet, r: f64) -> Result<ComponentLabeling> {
    check_radius(r)?;
    let grid = grid_for_radius(ps, r)?;
    let order = grid.entries();
    let local: Vec<TorusPoint> = order.iter().map(|&i| ps.point(i as usize)).collect();
    let mut uf = UnionFind::new(ps.len());
    let m = grid.cells_per_axis();
    for cy in 0..m {
        for cx in 0..m {
            let home = grid.bucket_range(cx, cy);
            if home.is_empty() {
                continue;
            }
            grid.for_each_cell_near(cx, cy, r, |gx, gy| {
                let other = grid.bucket_range(gx, gy);
                if other.end <= home.start {
                    return;
                }
                for a in home.clone() {
                    let p = local[a];
                    for b in other.start.max(a + 1)..other.end {
                        if torus_distance(p, local[b]) <= r {
                            uf.union(a, b);
                        }
                    }
                }
            });
        }
    }
    let mut slot = vec![0u32; ps.len()];
    for (k, &i) in order.iter().enumerate() {
        slot[i as usize] = k as u32;
    }
    Ok(ComponentLabeling::from_roots(ps.len(), |v| uf.find(slot[v] as usize)))
}

/// Vertices with no other point within distance `r`, ascending.
pub fn isolated_vertices(ps: &PointSet, r: f64) -> Result<Vec<usize>> {
    check_radius(r)?;
    let grid = grid_for_radius(ps, r)?;
    Ok(isolated_in_grid(ps, &grid, r))
}

pub(crate) fn isolated_in_grid(ps: &PointSet, grid: &CellGrid, r: f64) -> Vec<usize> {
    (0..ps.len())
        .filter(|&i| {
            let p = ps.point(i);
            grid.for_each_candidate(p, r, |j| {
                if j != i && torus_distance(p, ps.point(j)) <= r {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .is_continue()
        })
        .collect()
}
