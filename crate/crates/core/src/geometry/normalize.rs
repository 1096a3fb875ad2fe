use alloc::vec::Vec;

use super::{GeometryError, Point3, PointCloud};

/// Centroid and scale of a unit-sphere normalization, kept so the transform
/// can be undone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub centroid: Point3,
    pub scale: f64,
}

impl Normalization {
    pub const IDENTITY: Normalization = Normalization { centroid: Point3::ORIGIN, scale: 1.0 };

    #[inline]
    pub fn apply(&self, p: Point3) -> Point3 {
        (p - self.centroid) / self.scale
    }

    #[inline]
    pub fn invert(&self, p: Point3) -> Point3 {
        p * self.scale + self.centroid
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud::from_points_unchecked(cloud.points().iter().map(|&p| self.apply(p)).collect())
    }

    pub fn invert_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud::from_points_unchecked(cloud.points().iter().map(|&p| self.invert(p)).collect())
    }
}

/// Centers the cloud on its centroid and scales the farthest point to norm 1.
///
/// A cloud whose points all coincide gets scale 1.
pub fn normalize_unit_sphere(cloud: &PointCloud) -> Result<(PointCloud, Normalization), GeometryError> {
    let centroid = cloud.centroid().ok_or(GeometryError::EmptyInput)?;
    let centered: Vec<Point3> = cloud.points().iter().map(|&p| p - centroid).collect();
    let max_norm = centered.iter().map(Point3::norm).fold(0.0, f64::max);
    let scale = if max_norm > 0.0 { max_norm } else { 1.0 };
    let points = centered.into_iter().map(|p| p / scale).collect();
    Ok((PointCloud::from_points_unchecked(points), Normalization { centroid, scale }))
}
