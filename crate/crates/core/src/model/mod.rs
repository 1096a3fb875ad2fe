//! Generator and discriminator networks.
//!
//! The generator maps an `N x 3` patch to `rN x 3` points: a dense feature
//! extractor, a reduction to `C'` channels, the up-down-up expansion unit
//! producing `(r + 2) N` features, a coordinate regression head and a
//! farthest point sampling step keeping `rN` points. The discriminator
//! scores an `rN x 3` set with a value in `(0, 1)`.

mod discriminator;
mod generator;

pub use discriminator::{Discriminator, DiscriminatorConfig};
pub use generator::{
    down_grouping_index, grid_codes, DenseExtractor, DownFeature, Generator, GeneratorConfig, GeneratorOutput,
    UpDownUp, UpDownUpTrace, UpFeature,
};

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{GeometryError, Point3, PointCloud};
use crate::nn::{Array2, NnError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("expected {expected} input points, got {got}")]
    WrongSize { expected: usize, got: usize },
    #[error("{points} points are too few for {k}-nearest-neighbor grouping")]
    TooFewPoints { points: usize, k: usize },
    #[error("{rows} rows are not divisible by rate {rate}")]
    Indivisible { rows: usize, rate: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
}

/// Points as an `n x 3` array.
pub fn points_to_array(points: &[Point3]) -> Array2 {
    let data = points.iter().flat_map(|p| p.to_array()).collect();
    Array2::from_vec(points.len(), 3, data).expect("shape")
}

/// Rows of an `n x 3` array as points.
pub fn array_to_points(a: &Array2) -> Vec<Point3> {
    debug_assert_eq!(a.cols(), 3);
    (0..a.rows()).map(|r| Point3::new(a.get(r, 0), a.get(r, 1), a.get(r, 2))).collect()
}

/// An `n x 3` array as a validated cloud.
pub fn array_to_cloud(a: &Array2) -> Result<PointCloud, GeometryError> {
    PointCloud::new(array_to_points(a))
}
