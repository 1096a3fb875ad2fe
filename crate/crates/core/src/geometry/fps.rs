use alloc::vec;
use alloc::vec::Vec;

use super::{GeometryError, Point3};

/// Greedy max-min selection of `k` indices starting from `seed_index`.
///
/// Each subsequent pick maximizes the distance to the already selected set;
/// ties go to the lower index.
pub fn farthest_point_sampling(
    points: &[Point3],
    k: usize,
    seed_index: usize,
) -> Result<Vec<usize>, GeometryError> {
    let n = points.len();
    if n == 0 {
        return Err(GeometryError::EmptyInput);
    }
    if k == 0 || k > n {
        return Err(GeometryError::KOutOfRange { k, count: n });
    }
    if seed_index >= n {
        return Err(GeometryError::IndexOutOfRange { index: seed_index, count: n });
    }
    let mut selected = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let mut min_d2 = vec![f64::INFINITY; n];
    let mut current = seed_index;
    loop {
        selected.push(current);
        taken[current] = true;
        if selected.len() == k {
            break;
        }
        let c = points[current];
        let mut best = usize::MAX;
        let mut best_d2 = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d2 = p.distance_squared(&c);
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
            if !taken[i] && min_d2[i] > best_d2 {
                best_d2 = min_d2[i];
                best = i;
            }
        }
        current = best;
    }
    Ok(selected)
}
