use alloc::vec::Vec;

use super::bvh::TriangleBvh;
use super::MeshError;
use crate::geometry::{Normalization, Point3, PointCloud};

/// Triangles smaller than this (after normalization) are rejected.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// A validated triangle mesh normalized into the unit sphere.
///
/// Construction centers the vertices on their centroid and scales the
/// farthest vertex to norm 1, then builds the bounding-volume hierarchy used
/// for point-to-surface queries.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    total_area: f64,
    normalization: Normalization,
    bvh: TriangleBvh,
}

impl TriangleMesh {
    /// Validates and normalizes a mesh.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() {
            return Err(MeshError::NoVertices);
        }
        if triangles.is_empty() {
            return Err(MeshError::NoTriangles);
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::NonFiniteVertex(i));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange { triangle: t, vertex: v, count: vertices.len() });
                }
            }
        }
        let cloud = PointCloud::new(vertices)?;
        let (normalized, normalization) = crate::geometry::normalize_unit_sphere(&cloud)?;
        let vertices = normalized.into_points();
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let area = triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(MeshError::DegenerateTriangle { triangle: t, area });
            }
            areas.push(area);
        }
        let total_area = areas.iter().sum();
        let bvh = TriangleBvh::build(&vertices, &triangles);
        Ok(Self { vertices, triangles, areas, total_area, normalization, bvh })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// The transform that took the source coordinates into the unit sphere.
    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Exact minimum Euclidean distance from `p` to the surface.
    pub fn point_to_surface_distance(&self, p: &Point3) -> f64 {
        self.closest_surface_point(p).1
    }

    /// Closest surface point, its distance and the triangle it lies on.
    pub fn closest_surface_point(&self, p: &Point3) -> (Point3, f64, usize) {
        self.bvh.closest(&self.vertices, &self.triangles, p)
    }
}

pub(crate) fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (*b - *a).cross(&(*c - *a)).norm()
}
