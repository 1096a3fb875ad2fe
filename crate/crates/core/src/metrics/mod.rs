//! Evaluation metrics: Chamfer and Hausdorff distance, exact and auction
//! EMD, and the uniformity measure (ball-cropped or geodesically cropped).
//!
//! All values are unscaled; presentation scaling (e.g. x1000) is left to callers.

mod distance;
mod emd;
mod uniformity;

pub use distance::{chamfer_distance, hausdorff_distance, nearest_distances, p2f_distances, P2fSummary};
pub use emd::{emd, emd_approx, emd_exact, Matching, DEFAULT_AUCTION_EPS, EXACT_EMD_MAX};
pub use uniformity::{
    clutter, crop_ball_subsets, expected_count, expected_spacing, imbalance, uniformity_from_subsets,
    uniformity_loss_value, uniformity_report_mesh, uniformity_report_with_pool, Subset, UniformityReport,
    UNIFORMITY_PERCENTAGES,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::mesh::MeshError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("empty input")]
    EmptyInput,
    #[error("size mismatch: {left} vs {right} points")]
    SizeMismatch { left: usize, right: usize },
    #[error("exact EMD is limited to {max} points, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("percentage must lie in (0, 1), got {0}")]
    BadPercentage(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
