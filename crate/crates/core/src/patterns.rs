//! Planar point patterns in the unit disk for comparing uniformity:
//! a hexagonal lattice, uniform random points and Gaussian clusters.

use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::Point3;
use crate::math;
use crate::rng::standard_normal;

/// Points per pattern in the classic comparison.
pub const PATTERN_POINTS: usize = 625;

fn in_disk(x: f64, y: f64) -> bool {
    x * x + y * y <= 1.0
}

/// The `count` hexagonal lattice sites closest to the origin, with spacing
/// chosen so that `count` cells tile the unit disk. Ties in radius go to
/// the lower lattice row, then column.
pub fn hexagonal(count: usize) -> Vec<Point3> {
    let spacing = math::sqrt(2.0 * core::f64::consts::PI / (math::sqrt(3.0) * count as f64));
    let row_height = spacing * math::sqrt(3.0) / 2.0;
    let reach = (1.5 / row_height) as i64 + 2;
    let mut sites = Vec::new();
    for j in -reach..=reach {
        for i in -reach..=reach {
            let x = (i as f64 + 0.5 * (j.rem_euclid(2)) as f64) * spacing;
            let y = j as f64 * row_height;
            sites.push(Point3::new(x, y, 0.0));
        }
    }
    sites.sort_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()));
    sites.truncate(count);
    sites
}

/// `count` independent uniform points in the unit disk.
pub fn uniform_random<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Point3> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if in_disk(x, y) {
            out.push(Point3::new(x, y, 0.0));
        }
    }
    out
}

/// `count` points in `clusters` Gaussian blobs of width `sigma` whose
/// centers are uniform in the disk; points falling outside are redrawn.
pub fn clustered<R: Rng + ?Sized>(count: usize, clusters: usize, sigma: f64, rng: &mut R) -> Vec<Point3> {
    let centers = uniform_random(clusters.max(1), rng);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c = centers[out.len() % centers.len()];
        let (x, y) = (c.x + sigma * standard_normal(rng), c.y + sigma * standard_normal(rng));
        if in_disk(x, y) {
            out.push(Point3::new(x, y, 0.0));
        }
    }
    out
}
