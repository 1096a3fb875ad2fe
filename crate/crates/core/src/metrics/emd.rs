use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::MetricError;
use crate::geometry::{Point3, PointCloud};

/// Largest size solved with the exact assignment algorithm.
pub const EXACT_EMD_MAX: usize = 512;
/// Relative accuracy of the auction solver when none is given.
pub const DEFAULT_AUCTION_EPS: f64 = 1e-3;

/// A bijection from the first cloud onto the second: point `i` of the first
/// cloud is matched to point `assignment[i]` of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub assignment: Vec<usize>,
    /// Sum of matched L2 distances.
    pub cost: f64,
}

impl Matching {
    /// Cost divided by the number of matched pairs.
    pub fn normalized_cost(&self) -> f64 {
        if self.assignment.is_empty() {
            0.0
        } else {
            self.cost / self.assignment.len() as f64
        }
    }
}

fn matched_cost(a: &[Point3], b: &[Point3], assignment: &[usize]) -> f64 {
    a.iter().zip(assignment).map(|(p, &j)| p.distance(&b[j])).sum()
}

fn check_sizes(a: &PointCloud, b: &PointCloud) -> Result<usize, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::SizeMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(a.len())
}

fn cost_matrix(a: &[Point3], b: &[Point3]) -> Vec<f64> {
    let n = a.len();
    let mut c = Vec::with_capacity(n * n);
    for p in a {
        for q in b {
            c.push(p.distance(q));
        }
    }
    c
}

/// Minimum-cost bijection under L2 costs (shortest augmenting path
/// Hungarian algorithm, `O(n^3)`).
pub fn emd_exact(a: &PointCloud, b: &PointCloud) -> Result<Matching, MetricError> {
    let n = check_sizes(a, b)?;
    if n > EXACT_EMD_MAX {
        return Err(MetricError::TooLarge { got: n, max: EXACT_EMD_MAX });
    }
    let cost = cost_matrix(a.points(), b.points());
    let assignment = hungarian(&cost, n);
    let total = matched_cost(a.points(), b.points(), &assignment);
    Ok(Matching { assignment, cost: total })
}

/// Row-to-column assignment minimizing the summed cost of a dense `n x n` matrix.
fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    // 1-based potentials; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|u| *u = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// Auction-algorithm bijection whose cost is within a factor `1 + eps` of
/// the optimum.
///
/// The final bidding increment is `eps * LB / n`, where `LB` is a lower bound
/// on the optimal cost (largest of the row-minimum and column-minimum sums),
/// so the additive `n * increment` auction guarantee becomes relative.
/// Increments are reduced geometrically (epsilon scaling) with prices
/// carried between phases.
pub fn emd_approx(a: &PointCloud, b: &PointCloud, eps: f64) -> Result<Matching, MetricError> {
    let n = check_sizes(a, b)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(MetricError::BadEpsilon(eps));
    }
    if n == 1 {
        return Ok(Matching { assignment: vec![0], cost: a[0].distance(&b[0]) });
    }
    let cost = cost_matrix(a.points(), b.points());
    let max_cost = cost.iter().copied().fold(0.0, f64::max);
    if max_cost == 0.0 {
        return Ok(Matching { assignment: (0..n).collect(), cost: 0.0 });
    }
    let row_lb: f64 = cost.chunks_exact(n).map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).sum();
    let col_lb: f64 = (0..n)
        .map(|j| (0..n).map(|i| cost[i * n + j]).fold(f64::INFINITY, f64::min))
        .sum();
    let lower_bound = row_lb.max(col_lb);
    let final_eps = if lower_bound > 0.0 {
        eps * lower_bound / n as f64
    } else {
        // optimum may be zero; settle for a tiny additive error
        eps * 1e-9 * max_cost / n as f64
    };

    let mut prices = vec![0.0; n];
    let mut step = (max_cost / 4.0).max(final_eps);
    let mut owner_of = vec![usize::MAX; n];
    let mut object_of = vec![usize::MAX; n];
    loop {
        owner_of.iter_mut().for_each(|o| *o = usize::MAX);
        object_of.iter_mut().for_each(|o| *o = usize::MAX);
        let mut queue: VecDeque<usize> = (0..n).collect();
        while let Some(i) = queue.pop_front() {
            let row = &cost[i * n..(i + 1) * n];
            // maximize value = -cost - price
            let mut best = usize::MAX;
            let mut v1 = f64::NEG_INFINITY;
            let mut v2 = f64::NEG_INFINITY;
            for (j, (&c, &p)) in row.iter().zip(&prices).enumerate() {
                let val = -c - p;
                if val > v1 {
                    v2 = v1;
                    v1 = val;
                    best = j;
                } else if val > v2 {
                    v2 = val;
                }
            }
            prices[best] += v1 - v2 + step;
            let prev = owner_of[best];
            owner_of[best] = i;
            object_of[i] = best;
            if prev != usize::MAX {
                object_of[prev] = usize::MAX;
                queue.push_back(prev);
            }
        }
        if step <= final_eps {
            break;
        }
        step = (step / 5.0).max(final_eps);
    }
    let total = matched_cost(a.points(), b.points(), &object_of);
    Ok(Matching { assignment: object_of, cost: total })
}

/// Exact EMD up to [`EXACT_EMD_MAX`] points, auction with
/// [`DEFAULT_AUCTION_EPS`] beyond.
pub fn emd(a: &PointCloud, b: &PointCloud) -> Result<Matching, MetricError> {
    if a.len() <= EXACT_EMD_MAX {
        emd_exact(a, b)
    } else {
        emd_approx(a, b, DEFAULT_AUCTION_EPS)
    }
}
