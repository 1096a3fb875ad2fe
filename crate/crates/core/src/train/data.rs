use alloc::vec::Vec;

use rand::Rng;

use super::{TrainConfig, TrainError};
use crate::geometry::{normalize_unit_sphere, Normalization, Point3, PointCloud};
use crate::math;
use crate::mesh::{
    area_weighted_sample, eliminate_samples, GeodesicPool, MeshError, TriangleMesh, DEFAULT_GRAPH_K,
    DEFAULT_POOL_SIZE, POOL_FACTOR,
};
use crate::rng::{choose_distinct, random_rotation, rotate, standard_normal};

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchPair {
    /// `N` points drawn from `target`.
    pub input: PointCloud,
    /// `rN` Poisson-disk points on the patch, normalized to the unit sphere.
    pub target: PointCloud,
    pub mesh_id: usize,
    /// The transform from mesh coordinates to the normalized patch.
    pub normalization: Normalization,
}

/// `n` distinct points of `target`, in draw order.
pub fn sample_input<R: Rng + ?Sized>(target: &PointCloud, n: usize, rng: &mut R) -> Result<PointCloud, TrainError> {
    if n == 0 || n > target.len() {
        return Err(TrainError::PatchSize { expected: n, got: target.len() });
    }
    Ok(target.select(&choose_distinct(rng, target.len(), n)))
}

/// Random rotation and scale applied to both clouds, then Gaussian jitter
/// on the input only. Jitter vectors are redrawn until shorter than
/// `jitter_clip * jitter_sigma`. Disabled steps draw nothing.
pub fn augment<R: Rng + ?Sized>(pair: &PatchPair, cfg: &TrainConfig, rng: &mut R) -> PatchPair {
    let rotation = cfg.augment_rotate.then(|| random_rotation(rng));
    let scale = if cfg.augment_scale { rng.random_range(cfg.scale_min..=cfg.scale_max) } else { 1.0 };
    let transform = |p: Point3| {
        let p = match &rotation {
            Some(m) => rotate(m, p),
            None => p,
        };
        p * scale
    };
    let target: Vec<Point3> = pair.target.points().iter().map(|&p| transform(p)).collect();
    let mut input: Vec<Point3> = pair.input.points().iter().map(|&p| transform(p)).collect();
    if cfg.augment_jitter && cfg.jitter_sigma > 0.0 {
        let limit = cfg.jitter_clip * cfg.jitter_sigma;
        for p in &mut input {
            *p = *p + jitter(cfg.jitter_sigma, limit, rng);
        }
    }
    PatchPair {
        input: PointCloud::from_points_unchecked(input),
        target: PointCloud::from_points_unchecked(target),
        mesh_id: pair.mesh_id,
        normalization: pair.normalization,
    }
}

fn jitter<R: Rng + ?Sized>(sigma: f64, limit: f64, rng: &mut R) -> Point3 {
    loop {
        let v = Point3::new(standard_normal(rng), standard_normal(rng), standard_normal(rng)) * sigma;
        if v.norm() < limit {
            return v;
        }
    }
}

/// Patches of one mesh and the patches that failed.
#[derive(Debug, Clone)]
pub struct MeshPatches {
    pub pairs: Vec<PatchPair>,
    pub failures: Vec<MeshError>,
}

/// Dense pool size so that a patch of `fraction` holds `POOL_FACTOR` times
/// the target count.
pub fn pool_size(target_points: usize, fraction: f64) -> usize {
    let needed = math::ceil((POOL_FACTOR * target_points) as f64 / fraction) as usize;
    needed.max(DEFAULT_POOL_SIZE)
}

/// Training pairs from one mesh: area-weighted seeds, geodesic patches of
/// `patch_fraction` of the surface, Poisson-disk elimination to `rN` points
/// and unit-sphere normalization. Failed patches are collected; fewer than
/// `min_patches_per_mesh` successes is an error.
pub fn build_mesh_patches<R: Rng + ?Sized>(
    mesh: &TriangleMesh,
    mesh_id: usize,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<MeshPatches, TrainError> {
    let m = cfg.target_points();
    let pool = GeodesicPool::sample(mesh, pool_size(m, cfg.patch_fraction), DEFAULT_GRAPH_K, rng)?;
    let seeds = area_weighted_sample(mesh, cfg.patches_per_mesh, rng)?;
    let area = cfg.patch_fraction * mesh.total_area();
    let mut pairs = Vec::with_capacity(seeds.len());
    let mut failures = Vec::new();
    for seed in seeds {
        let patch = match pool.grow_patch(seed, cfg.patch_fraction) {
            Ok(p) => p,
            Err(e) => {
                failures.push(e);
                continue;
            }
        };
        let positions: Vec<Point3> = patch.samples.iter().map(|s| s.position).collect();
        let keep = match eliminate_samples(&positions, m, area) {
            Ok(k) => k,
            Err(e) => {
                failures.push(e);
                continue;
            }
        };
        let cloud = PointCloud::from_points_unchecked(keep.into_iter().map(|i| positions[i]).collect());
        let (target, normalization) = normalize_unit_sphere(&cloud)?;
        let input = sample_input(&target, cfg.n, rng)?;
        pairs.push(PatchPair { input, target, mesh_id, normalization });
    }
    if pairs.len() < cfg.min_patches_per_mesh {
        return Err(TrainError::TooFewPatches {
            mesh_id,
            succeeded: pairs.len(),
            required: cfg.min_patches_per_mesh,
        });
    }
    Ok(MeshPatches { pairs, failures })
}
