use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::Rng;

use super::{area_weighted_sample, MeshError, SurfaceSample, TriangleMesh};
use crate::geometry::{Point3, SpatialIndex};
use crate::math;

/// Neighbors per pool point in the geodesic graph.
pub const DEFAULT_GRAPH_K: usize = 10;
/// Dense pool size per mesh.
pub const DEFAULT_POOL_SIZE: usize = 50_000;
const MIN_POOL: usize = 1000;
/// Normal dot product below which two triangles face opposite ways.
const OPPOSED_NORMALS: f64 = -0.5;

/// A geodesically grown surface region.
#[derive(Debug, Clone)]
pub struct Patch {
    /// Pool samples, ordered by increasing graph distance from the seed.
    pub samples: Vec<SurfaceSample>,
    /// Pool indices of `samples`.
    pub pool_indices: Vec<usize>,
    pub seed: SurfaceSample,
    /// Fraction of the pool (and so, approximately, of the surface area) covered.
    pub area_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Dense area-weighted sample pool over a mesh with a symmetric kNN graph.
/// Shortest paths in the graph approximate surface geodesics.
#[derive(Debug, Clone)]
pub struct GeodesicPool {
    samples: Vec<SurfaceSample>,
    index: SpatialIndex,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl GeodesicPool {
    /// Samples `pool_size` points on the mesh and connects each to its
    /// `k` nearest neighbors (edges made symmetric).
    ///
    /// An edge between samples on triangles that share no vertex and face
    /// opposite ways (normals more than 120 degrees apart) is dropped, so
    /// paths do not jump between thin parallel sheets of the surface.
    pub fn sample<R: Rng + ?Sized>(
        mesh: &TriangleMesh,
        pool_size: usize,
        k: usize,
        rng: &mut R,
    ) -> Result<Self, MeshError> {
        let samples = area_weighted_sample(mesh, pool_size, rng)?;
        let normals: Vec<Point3> = (0..mesh.triangles().len())
            .map(|t| {
                let [a, b, c] = mesh.triangle_vertices(t);
                let n = (b - a).cross(&(c - a));
                n / n.norm()
            })
            .collect();
        let tris = mesh.triangles();
        let shares_vertex = |s: usize, t: usize| tris[s].iter().any(|v| tris[t].contains(v));
        Self::build(samples, k, |a, b| {
            let (s, t) = (a.triangle, b.triangle);
            s == t || shares_vertex(s, t) || normals[s].dot(&normals[t]) >= OPPOSED_NORMALS
        })
    }

    /// Pool from given samples, keeping every kNN edge.
    pub fn from_samples(samples: Vec<SurfaceSample>, k: usize) -> Result<Self, MeshError> {
        Self::build(samples, k, |_, _| true)
    }

    fn build(
        samples: Vec<SurfaceSample>,
        k: usize,
        keep: impl Fn(&SurfaceSample, &SurfaceSample) -> bool,
    ) -> Result<Self, MeshError> {
        if samples.len() < MIN_POOL {
            return Err(MeshError::PoolTooSmall { pool: samples.len(), requested: MIN_POOL });
        }
        let points: Vec<Point3> = samples.iter().map(|s| s.position).collect();
        let index = SpatialIndex::from_points(&points)?;
        let k = k.min(points.len() - 1);
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(2 * k); points.len()];
        for (i, p) in points.iter().enumerate() {
            for n in index.knn(p, k + 1)? {
                if n.index != i && keep(&samples[i], &samples[n.index]) {
                    adjacency[i].push((n.index, n.distance));
                    adjacency[n.index].push((i, n.distance));
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            list.dedup_by_key(|e| e.0);
        }
        Ok(Self { samples, index, adjacency })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    /// Pool point closest to `p`.
    pub fn nearest(&self, p: &Point3) -> usize {
        self.index.knn(p, 1).expect("pool is non-empty")[0].index
    }

    /// Dijkstra from `source`, visiting nodes in order of graph distance
    /// until `visit` returns `false`. Ties go to the lower pool index.
    pub fn walk(&self, source: usize, mut visit: impl FnMut(usize, f64) -> bool) {
        let mut dist = vec![f64::INFINITY; self.samples.len()];
        let mut done = vec![false; self.samples.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((Dist(0.0), source)));
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if !visit(u, d) {
                return;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if !done[v] && nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((Dist(nd), v)));
                }
            }
        }
    }

    /// Pool indices within graph distance `radius` of `source`, with distances.
    pub fn within(&self, source: usize, radius: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.walk(source, |u, d| {
            if d > radius {
                return false;
            }
            out.push((u, d));
            true
        });
        out
    }

    /// The `ceil(f * pool)` pool points closest in graph distance to the pool
    /// point nearest `seed`.
    pub fn grow_patch(&self, seed: SurfaceSample, fraction: f64) -> Result<Patch, MeshError> {
        if !(fraction > 0.0 && fraction < 0.5) {
            return Err(MeshError::BadFraction(fraction));
        }
        let wanted = (math::ceil(fraction * self.samples.len() as f64) as usize).max(1);
        let source = self.nearest(&seed.position);
        let mut picked = Vec::with_capacity(wanted);
        self.walk(source, |u, _| {
            picked.push(u);
            picked.len() < wanted
        });
        if picked.len() < wanted {
            return Err(MeshError::PatchExceedsComponent { requested: wanted, available: picked.len() });
        }
        Ok(Patch {
            samples: picked.iter().map(|&i| self.samples[i]).collect(),
            area_fraction: picked.len() as f64 / self.samples.len() as f64,
            pool_indices: picked,
            seed,
        })
    }
}
