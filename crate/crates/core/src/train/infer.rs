use alloc::vec::Vec;

use super::{SampleMap, TrainError};
use crate::geometry::{farthest_point_sampling, normalize_unit_sphere, Point3, PointCloud, SpatialIndex};
use crate::math;
use crate::model::{array_to_points, points_to_array, Generator};
use crate::nn::Params;

/// Seeds per input point, relative to one patch per `N` points.
pub const DEFAULT_OVERLAP: f64 = 3.0;

/// Anything that maps a normalized `N`-point patch to `rate * N` points.
pub trait PatchUpsampler: Sync {
    fn patch_size(&self) -> usize;
    fn rate(&self) -> usize;
    fn upsample_patch(&self, patch: &PointCloud) -> Result<Vec<Point3>, TrainError>;
}

/// A trained generator with its parameters.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorUpsampler<'a> {
    pub generator: &'a Generator,
    pub params: &'a Params,
}

impl PatchUpsampler for GeneratorUpsampler<'_> {
    fn patch_size(&self) -> usize {
        self.generator.config.n
    }

    fn rate(&self) -> usize {
        self.generator.config.r
    }

    fn upsample_patch(&self, patch: &PointCloud) -> Result<Vec<Point3>, TrainError> {
        let out = self.generator.generate(self.params, &points_to_array(patch.points()))?;
        Ok(array_to_points(&out))
    }
}

/// Upsamples a whole cloud to `rate * input.len()` points.
///
/// Seeds are picked by farthest point sampling (`ceil(overlap * len / N)`
/// of them, starting at point 0); each seed's `N` nearest input points form
/// a patch that is normalized, upsampled and mapped back. The union of all
/// patch outputs is reduced to the final count by farthest point sampling.
///
/// An input with fewer than `N` points is normalized as a whole and padded
/// with copies of its centroid to a single `N`-point patch.
pub fn upsample_cloud<U: PatchUpsampler, M: SampleMap>(
    input: &PointCloud,
    upsampler: &U,
    overlap: f64,
    map: &M,
) -> Result<PointCloud, TrainError> {
    let n = upsampler.patch_size();
    let len = input.len();
    if len == 0 {
        return Err(TrainError::PatchSize { expected: n, got: 0 });
    }
    let patches: Vec<Vec<Point3>> = if len < n {
        let mut padded = input.points().to_vec();
        padded.resize(n, input.centroid().unwrap_or(Point3::ORIGIN));
        alloc::vec![padded]
    } else {
        let seeds = (math::ceil(overlap * len as f64 / n as f64) as usize).clamp(1, len);
        let index = SpatialIndex::build(input)?;
        farthest_point_sampling(input.points(), seeds, 0)?
            .into_iter()
            .map(|s| Ok(index.knn(&input[s], n)?.into_iter().map(|nb| input[nb.index]).collect()))
            .collect::<Result<_, TrainError>>()?
    };
    let outputs = map.map(patches.len(), |i| -> Result<Vec<Point3>, TrainError> {
        let patch = PointCloud::new(patches[i].clone())?;
        let (normalized, transform) = normalize_unit_sphere(&patch)?;
        let up = upsampler.upsample_patch(&normalized)?;
        Ok(up.into_iter().map(|p| transform.invert(p)).collect())
    });
    let mut union = Vec::new();
    for out in outputs {
        union.extend(out?);
    }
    let wanted = upsampler.rate() * len;
    if union.len() < wanted {
        return Err(TrainError::PatchSize { expected: wanted, got: union.len() });
    }
    let keep = farthest_point_sampling(&union, wanted, 0)?;
    Ok(PointCloud::new(keep.into_iter().map(|i| union[i]).collect())?)
}
