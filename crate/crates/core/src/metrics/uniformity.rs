use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use super::MetricError;
use crate::geometry::{farthest_point_sampling, Point3, PointCloud, SpatialIndex};
use crate::mesh::{GeodesicPool, TriangleMesh, DEFAULT_GRAPH_K, DEFAULT_POOL_SIZE};
use crate::math;

/// The five area percentages the uniformity measure is evaluated at.
pub const UNIFORMITY_PERCENTAGES: [f64; 5] = [0.004, 0.006, 0.008, 0.010, 0.012];

/// Expected number of points in a crop covering fraction `p` of the surface.
pub fn expected_count(total_points: usize, p: f64) -> f64 {
    total_points as f64 * p
}

/// Expected nearest-neighbor spacing of `count` points packed hexagonally
/// in a disk of radius `radius`.
pub fn expected_spacing(radius: f64, count: usize) -> f64 {
    math::sqrt(2.0 * PI * radius * radius / (count as f64 * math::sqrt(3.0)))
}

/// Chi-squared deviation of a crop's size from the expected count.
/// An empty crop yields `n_hat`.
pub fn imbalance(count: usize, n_hat: f64) -> f64 {
    let d = count as f64 - n_hat;
    d * d / n_hat
}

/// Chi-squared deviation of nearest-neighbor distances from `d_hat`.
pub fn clutter(nn_distances: &[f64], d_hat: f64) -> f64 {
    nn_distances.iter().map(|d| (d - d_hat) * (d - d_hat) / d_hat).sum()
}

/// One cropped subset with its nearest-neighbor pairing frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    /// Point indices of the crop, ascending.
    pub members: Vec<usize>,
    /// For each member, the index of its nearest other member (empty when
    /// the crop has fewer than two points).
    pub partners: Vec<usize>,
    pub radius: f64,
    pub n_hat: f64,
}

impl Subset {
    /// Pairs each member with its nearest other member (ties to lower index).
    pub fn new(points: &[Point3], members: Vec<usize>, radius: f64, n_hat: f64) -> Self {
        let partners = if members.len() < 2 {
            Vec::new()
        } else {
            members
                .iter()
                .map(|&i| {
                    let mut best = usize::MAX;
                    let mut best_d = f64::INFINITY;
                    for &j in &members {
                        if j != i {
                            let d = points[i].distance(&points[j]);
                            if d < best_d {
                                best_d = d;
                                best = j;
                            }
                        }
                    }
                    best
                })
                .collect()
        };
        Self { members, partners, radius, n_hat }
    }

    pub fn imbalance(&self) -> f64 {
        imbalance(self.members.len(), self.n_hat)
    }

    /// Expected spacing for this crop, `None` below two points.
    pub fn d_hat(&self) -> Option<f64> {
        (self.members.len() >= 2).then(|| expected_spacing(self.radius, self.members.len()))
    }

    pub fn nn_distances(&self, points: &[Point3]) -> Vec<f64> {
        self.members.iter().zip(&self.partners).map(|(&i, &j)| points[i].distance(&points[j])).collect()
    }

    /// Clutter term; zero below two points.
    pub fn clutter(&self, points: &[Point3]) -> f64 {
        match self.d_hat() {
            Some(d_hat) => clutter(&self.nn_distances(points), d_hat),
            None => 0.0,
        }
    }

    pub fn value(&self, points: &[Point3]) -> f64 {
        self.imbalance() * self.clutter(points)
    }
}

/// Sums imbalance times clutter over all subsets.
pub fn uniformity_from_subsets(points: &[Point3], subsets: &[Subset]) -> f64 {
    subsets.iter().map(|s| s.value(points)).sum()
}

/// Ball-cropped subsets for one percentage `p`: `m` farthest-point seeds
/// (starting at point 0), radius `sqrt(p)`, expected count `|Q| p`.
pub fn crop_ball_subsets(
    points: &[Point3],
    index: &SpatialIndex,
    p: f64,
    m: usize,
) -> Result<Vec<Subset>, MetricError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MetricError::BadPercentage(p));
    }
    if points.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let radius = math::sqrt(p);
    let n_hat = expected_count(points.len(), p);
    let seeds = farthest_point_sampling(points, m.min(points.len()), 0)?;
    seeds
        .iter()
        .map(|&s| {
            let members = index.ball_query(&points[s], radius)?;
            Ok(Subset::new(points, members, radius, n_hat))
        })
        .collect()
}

/// Uniformity of a unit-sphere-normalized patch at one percentage `p`,
/// using `m` farthest-point seeds and Euclidean ball crops.
pub fn uniformity_loss_value(cloud: &PointCloud, p: f64, m: usize) -> Result<f64, MetricError> {
    if cloud.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let index = SpatialIndex::build(cloud)?;
    let subsets = crop_ball_subsets(cloud.points(), &index, p, m)?;
    Ok(uniformity_from_subsets(cloud.points(), &subsets))
}

/// Uniformity at each of [`UNIFORMITY_PERCENTAGES`].
#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    pub percentages: [f64; 5],
    pub values: [f64; 5],
    pub seeds: usize,
}

/// Uniformity of a whole-model prediction, with crops found geodesically on
/// a dense pool over the reference mesh.
///
/// Seeds are `m` distinct random points of `cloud`. For percentage `p` the
/// crop radius is `sqrt(p A / pi)` for mesh area `A`, so that the crop
/// covers fraction `p` of the surface (this reduces to `sqrt(p)` on a patch
/// of area `pi`).
pub fn uniformity_report_mesh(
    cloud: &PointCloud,
    mesh: &TriangleMesh,
    m: usize,
    seed: u64,
) -> Result<UniformityReport, MetricError> {
    let mut rng = crate::rng::seeded(seed);
    let pool = GeodesicPool::sample(mesh, DEFAULT_POOL_SIZE, DEFAULT_GRAPH_K, &mut rng)?;
    uniformity_report_with_pool(cloud, &pool, mesh.total_area(), m, &mut rng)
}

/// [`uniformity_report_mesh`] with a caller-supplied pool.
pub fn uniformity_report_with_pool<R: Rng + ?Sized>(
    cloud: &PointCloud,
    pool: &GeodesicPool,
    area: f64,
    m: usize,
    rng: &mut R,
) -> Result<UniformityReport, MetricError> {
    if cloud.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let points = cloud.points();
    // pool node -> cloud points snapped to it
    let mut snapped: Vec<Vec<usize>> = vec![Vec::new(); pool.len()];
    let mut node_of = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let node = pool.nearest(p);
        snapped[node].push(i);
        node_of.push(node);
    }
    let radii = UNIFORMITY_PERCENTAGES.map(|p| math::sqrt(p * area / PI));
    let max_radius = radii.iter().copied().fold(0.0, f64::max);
    let seeds = crate::rng::choose_distinct(rng, points.len(), m.min(points.len()));

    let mut values = [0.0; 5];
    for &s in &seeds {
        let mut reached: Vec<(usize, f64)> = Vec::new();
        for (node, d) in pool.within(node_of[s], max_radius) {
            for &i in &snapped[node] {
                reached.push((i, d));
            }
        }
        for (k, (&p, &radius)) in UNIFORMITY_PERCENTAGES.iter().zip(&radii).enumerate() {
            let mut members: Vec<usize> = reached.iter().filter(|(_, d)| *d <= radius).map(|(i, _)| *i).collect();
            members.sort_unstable();
            let subset = Subset::new(points, members, radius, expected_count(points.len(), p));
            values[k] += subset.value(points);
        }
    }
    Ok(UniformityReport { percentages: UNIFORMITY_PERCENTAGES, values, seeds: seeds.len() })
}
