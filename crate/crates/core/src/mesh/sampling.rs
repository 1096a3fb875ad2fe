use alloc::vec::Vec;

use rand::Rng;

use super::{MeshError, TriangleMesh};
use crate::geometry::{Point3, PointCloud};
use crate::math;

/// A point on a mesh surface with its triangle and barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: Point3,
    pub triangle: usize,
    pub barycentric: [f64; 3],
}

impl SurfaceSample {
    pub fn from_barycentric(mesh: &TriangleMesh, triangle: usize, barycentric: [f64; 3]) -> Self {
        let [a, b, c] = mesh.triangle_vertices(triangle);
        let position = a * barycentric[0] + b * barycentric[1] + c * barycentric[2];
        Self { position, triangle, barycentric }
    }
}

/// Collects sample positions into a cloud.
pub fn positions(samples: &[SurfaceSample]) -> PointCloud {
    PointCloud::from_points_unchecked(samples.iter().map(|s| s.position).collect())
}

/// `n` i.i.d. samples: triangle chosen proportionally to area, then a
/// uniform point inside it.
pub fn area_weighted_sample<R: Rng + ?Sized>(
    mesh: &TriangleMesh,
    n: usize,
    rng: &mut R,
) -> Result<Vec<SurfaceSample>, MeshError> {
    if n == 0 {
        return Err(MeshError::ZeroSamples);
    }
    let mut cumulative = Vec::with_capacity(mesh.triangle_areas().len());
    let mut acc = 0.0;
    for a in mesh.triangle_areas() {
        acc += a;
        cumulative.push(acc);
    }
    let total = acc;
    let last = cumulative.len() - 1;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let t = cumulative.partition_point(|&c| c <= target).min(last);
        let r1 = math::sqrt(rng.random::<f64>());
        let r2: f64 = rng.random();
        let bary = [1.0 - r1, r1 * (1.0 - r2), r1 * r2];
        out.push(SurfaceSample::from_barycentric(mesh, t, bary));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use alloc::vec;

    fn two_triangles() -> TriangleMesh {
        // areas 1 and 3 before normalization; ratio survives scaling
        TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(2.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
                Point3::new(3.0, 0.0, 1.0),
                Point3::new(0.0, 2.0, 1.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap()
    }

    #[test]
    fn counts_follow_area() {
        let mesh = two_triangles();
        let a = mesh.triangle_areas();
        assert!((a[1] / a[0] - 3.0).abs() < 1e-12);
        let n = 40_000;
        let s = area_weighted_sample(&mesh, n, &mut seeded(17)).unwrap();
        let first = s.iter().filter(|s| s.triangle == 0).count() as f64;
        // binomial(n, 1/4): mean 10000, sigma sqrt(n p q) ~ 86.6
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        assert!((first - 10_000.0).abs() < 3.0 * sigma, "{first}");
    }

    #[test]
    fn samples_are_valid() {
        let mesh = two_triangles();
        let s = area_weighted_sample(&mesh, 1, &mut seeded(1)).unwrap();
        assert_eq!(s.len(), 1);
        let b = s[0].barycentric;
        assert!(b.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(mesh.point_to_surface_distance(&s[0].position) < 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let mesh = two_triangles();
        let a = area_weighted_sample(&mesh, 500, &mut seeded(4)).unwrap();
        let b = area_weighted_sample(&mesh, 500, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
        assert!(area_weighted_sample(&mesh, 0, &mut seeded(4)).is_err());
    }
}
