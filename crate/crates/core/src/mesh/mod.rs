//! Triangle meshes and everything sampled from them: area-weighted and
//! Poisson-disk surface samples, geodesic patches over a dense sample pool,
//! and exact point-to-surface distance.

mod bvh;
mod geodesic;
mod poisson;
mod sampling;
pub mod shapes;
mod triangle;

pub use bvh::closest_point_on_triangle;
pub use geodesic::{GeodesicPool, Patch, DEFAULT_GRAPH_K, DEFAULT_POOL_SIZE};
pub use poisson::{eliminate_samples, poisson_disk_sample, hexagonal_packing_radius, POOL_FACTOR};
pub use sampling::{area_weighted_sample, positions, SurfaceSample};
pub use triangle::TriangleMesh;

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("mesh has no vertices")]
    NoVertices,
    #[error("mesh has no triangles")]
    NoTriangles,
    #[error("triangle {triangle} references vertex {vertex} but the mesh has {count} vertices")]
    IndexOutOfRange { triangle: usize, vertex: usize, count: usize },
    #[error("non-finite vertex {0}")]
    NonFiniteVertex(usize),
    #[error("degenerate triangle {triangle} (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("pool of {pool} samples is too small for {requested}")]
    PoolTooSmall { pool: usize, requested: usize },
    #[error("area fraction {0} must lie in (0, 0.5)")]
    BadFraction(f64),
    #[error("patch exceeds component: {requested} points requested, {available} reachable")]
    PatchExceedsComponent { requested: usize, available: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
