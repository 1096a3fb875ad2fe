use alloc::vec::Vec;

use super::{GeometryError, Point3};

/// An ordered set of finite 3D points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3>) -> Result<Self, GeometryError> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        Ok(Self { points })
    }

    /// Builds a cloud from points already known to be finite.
    pub(crate) fn from_points_unchecked(points: Vec<Point3>) -> Self {
        debug_assert!(points.iter().all(Point3::is_finite));
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    pub fn get(&self, i: usize) -> Option<&Point3> {
        self.points.get(i)
    }

    /// Picks points by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
        }
    }

    /// Applies a finite-preserving map to every point.
    pub fn map(&self, f: impl Fn(Point3) -> Point3) -> Result<PointCloud, GeometryError> {
        PointCloud::new(self.points.iter().map(|&p| f(p)).collect())
    }

    pub fn centroid(&self) -> Option<Point3> {
        if self.points.is_empty() {
            return None;
        }
        let mut c = Point3::ORIGIN;
        for p in &self.points {
            c += *p;
        }
        Some(c / self.points.len() as f64)
    }

    /// Flattened `[x0, y0, z0, x1, ...]` coordinates.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len() * 3);
        for p in &self.points {
            out.extend_from_slice(&[p.x, p.y, p.z]);
        }
        out
    }

    pub fn from_flat(data: &[f64]) -> Result<Self, GeometryError> {
        assert!(data.len() % 3 == 0, "flat coordinate buffer length must be a multiple of 3");
        Self::new(data.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect())
    }
}

impl core::ops::Index<usize> for PointCloud {
    type Output = Point3;
    fn index(&self, i: usize) -> &Point3 {
        &self.points[i]
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point3;
    type IntoIter = core::slice::Iter<'a, Point3>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
