use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use super::{area_weighted_sample, MeshError, SurfaceSample, TriangleMesh};
use crate::geometry::{Point3, SpatialIndex};
use crate::math;

/// Pool size relative to the requested sample count.
pub const POOL_FACTOR: usize = 5;
const WEIGHT_EXPONENT: i32 = 8;

/// Packing radius of `m` points in hexagonal arrangement over `area`.
pub fn hexagonal_packing_radius(area: f64, m: usize) -> f64 {
    math::sqrt(area / (2.0 * math::sqrt(3.0) * m as f64))
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    weight: f64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // max-heap on weight; equal weights pop the lower index first
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight.total_cmp(&other.weight).then(other.index.cmp(&self.index))
    }
}

/// Weighted sample elimination: removes the most crowded point of `pool`
/// until `m` remain. `area` is the surface area the pool covers.
///
/// Returns surviving pool indices in ascending order.
pub fn eliminate_samples(pool: &[Point3], m: usize, area: f64) -> Result<Vec<usize>, MeshError> {
    if m == 0 {
        return Err(MeshError::ZeroSamples);
    }
    if pool.len() < m {
        return Err(MeshError::PoolTooSmall { pool: pool.len(), requested: m });
    }
    if pool.len() == m {
        return Ok((0..m).collect());
    }
    let r_max = hexagonal_packing_radius(area, m);
    let reach = 2.0 * r_max;
    let index = SpatialIndex::from_points(pool)?;

    let kernel = |d: f64| math::powi(1.0 - d / reach, WEIGHT_EXPONENT);
    let mut neighbors: Vec<Vec<(usize, f64)>> = Vec::with_capacity(pool.len());
    let mut weights = vec![0.0; pool.len()];
    for (i, p) in pool.iter().enumerate() {
        let near = index.ball_query_with_distance(p, reach)?;
        let mut list = Vec::with_capacity(near.len());
        for n in near {
            if n.index != i && n.distance < reach {
                let w = kernel(n.distance);
                weights[i] += w;
                list.push((n.index, w));
            }
        }
        neighbors.push(list);
    }

    let mut alive = vec![true; pool.len()];
    let mut heap: BinaryHeap<HeapEntry> =
        weights.iter().enumerate().map(|(index, &weight)| HeapEntry { weight, index }).collect();
    let mut remaining = pool.len();
    while remaining > m {
        let Some(top) = heap.pop() else { break };
        // stale entry: the weight changed after it was pushed
        if !alive[top.index] || top.weight != weights[top.index] {
            continue;
        }
        alive[top.index] = false;
        remaining -= 1;
        for &(j, w) in &neighbors[top.index] {
            if alive[j] {
                weights[j] -= w;
                heap.push(HeapEntry { weight: weights[j], index: j });
            }
        }
    }
    Ok((0..pool.len()).filter(|&i| alive[i]).collect())
}

/// Exactly `m` Poisson-disk distributed surface samples, obtained by
/// eliminating from a pool of `5 m` area-weighted samples.
pub fn poisson_disk_sample<R: Rng + ?Sized>(
    mesh: &TriangleMesh,
    m: usize,
    rng: &mut R,
) -> Result<Vec<SurfaceSample>, MeshError> {
    if m == 0 {
        return Err(MeshError::ZeroSamples);
    }
    let pool = area_weighted_sample(mesh, POOL_FACTOR * m, rng)?;
    let positions: Vec<Point3> = pool.iter().map(|s| s.position).collect();
    let keep = eliminate_samples(&positions, m, mesh.total_area())?;
    Ok(keep.into_iter().map(|i| pool[i]).collect())
}
