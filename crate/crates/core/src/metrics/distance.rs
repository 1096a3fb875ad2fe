use alloc::vec::Vec;

use super::MetricError;
use crate::geometry::{PointCloud, SpatialIndex};
use crate::mesh::TriangleMesh;

/// Distance from every point of `from` to its nearest point in `to`.
pub fn nearest_distances(from: &PointCloud, to: &PointCloud) -> Result<Vec<f64>, MetricError> {
    if from.is_empty() || to.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let index = SpatialIndex::build(to)?;
    from.points()
        .iter()
        .map(|p| Ok(index.knn(p, 1)?[0].distance))
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Chamfer distance: the average of the two directed mean nearest-neighbor
/// distances (unsquared L2).
pub fn chamfer_distance(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricError> {
    let ab = nearest_distances(a, b)?;
    let ba = nearest_distances(b, a)?;
    Ok(0.5 * (mean(&ab) + mean(&ba)))
}

/// Hausdorff distance: the larger of the two directed max-min distances.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricError> {
    let ab = nearest_distances(a, b)?;
    let ba = nearest_distances(b, a)?;
    Ok(ab.iter().chain(ba.iter()).copied().fold(0.0, f64::max))
}

/// Mean and max point-to-surface distance of a prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2fSummary {
    pub mean: f64,
    pub max: f64,
}

/// Point-to-surface distance of every point in `cloud`.
pub fn p2f_distances(cloud: &PointCloud, mesh: &TriangleMesh) -> Result<(Vec<f64>, P2fSummary), MetricError> {
    if cloud.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let d: Vec<f64> = cloud.points().iter().map(|p| mesh.point_to_surface_distance(p)).collect();
    let summary = P2fSummary { mean: mean(&d), max: d.iter().copied().fold(0.0, f64::max) };
    Ok((d, summary))
}
