//! Seeded randomness shared by every sampling routine.
//!
//! Everything stochastic takes an explicit generator so that identical seeds
//! reproduce identical outputs across runs and platforms.

use rand::{Rng, SeedableRng};

use crate::geometry::Point3;
use crate::math;

/// The generator used throughout: ChaCha8, portable and reproducible.
pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Derives an independent stream from a base seed and a label.
pub fn derive(seed: u64, stream: u64) -> SeededRng {
    let mut rng = SeededRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal draw (Box-Muller).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // u1 in (0, 1] so the log is finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
}

/// Row-major 3x3 rotation drawn uniformly from SO(3) via a random unit quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 3]; 3] {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random::<f64>() * core::f64::consts::TAU;
    let u3: f64 = rng.random::<f64>() * core::f64::consts::TAU;
    let a = math::sqrt(1.0 - u1);
    let b = math::sqrt(u1);
    let (w, x, y, z) = (a * math::sin(u2), a * math::cos(u2), b * math::sin(u3), b * math::cos(u3));
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn rotate(m: &[[f64; 3]; 3], p: Point3) -> Point3 {
    Point3::new(
        m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
        m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
        m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
    )
}

/// `k` distinct indices from `0..n` (partial Fisher-Yates), in draw order.
pub fn choose_distinct<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    assert!(k <= n, "cannot choose {k} of {n}");
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
