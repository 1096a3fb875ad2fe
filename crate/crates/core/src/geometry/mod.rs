//! Points, point clouds, exact spatial queries, farthest point sampling and
//! unit-sphere normalization.

mod cloud;
mod fps;
mod kdtree;
mod normalize;
mod point;

pub use cloud::PointCloud;
pub use fps::farthest_point_sampling;
pub use kdtree::{Neighbor, SpatialIndex};
pub use normalize::{normalize_unit_sphere, Normalization};
pub use point::Point3;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("empty input")]
    EmptyInput,
    #[error("k = {k} is out of range for {count} points")]
    KOutOfRange { k: usize, count: usize },
    #[error("index {index} is out of range for {count} points")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
}
