//! Central finite-difference checks of [`Graph`] gradients.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{Array2, Graph, NnError, Params, Var};
use crate::math;

/// Outcome of [`check_gradients`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest per-tensor relative error `|a - n| / max(|a|, |n|, 1e-6)`.
    pub max_rel_error: f64,
    /// Tensor with the largest error (`input[i]` or a parameter name).
    pub worst: String,
    /// Number of scalar entries compared.
    pub checked: usize,
    /// Entries left out because the function has a kink within reach of the
    /// step (differences at `h` and `h / 2` disagree for both `h = step` and
    /// `h = step / 100`), e.g. a ReLU input within `1e-6` of zero.
    pub skipped: usize,
}

impl GradCheckReport {
    /// Error below `tol` with at most 5% of the entries skipped.
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol && self.skipped * 20 <= self.checked + self.skipped
    }
}

/// Uniform random array in `[-scale, scale]`.
pub fn random_array<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Array2 {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..=scale)).collect();
    Array2::from_vec(rows, cols, data).expect("shape")
}

/// Adds uniform noise in `[-scale, scale]` to every parameter.
///
/// Freshly initialized biases are exactly zero, which places ReLU inputs of
/// dead rows exactly on the kink; perturbing them first keeps central
/// differences away from it.
pub fn jitter_params<R: Rng + ?Sized>(params: &mut Params, scale: f64, rng: &mut R) {
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        for v in params.value_mut(id).data_mut() {
            *v += rng.random_range(-scale..=scale);
        }
    }
}

fn evaluate<F>(inputs: &[Array2], params: &Params, f: &F) -> Result<f64, NnError>
where
    F: Fn(&mut Graph, &Params, &[Var]) -> Result<Var, NnError>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|a| g.input(a.clone())).collect();
    let loss = f(&mut g, params, &vars)?;
    let v = g.value(loss);
    if v.shape() != (1, 1) {
        return Err(NnError::NonScalarLoss { rows: v.rows(), cols: v.cols() });
    }
    Ok(v.item())
}

/// Central difference at `step`, or `None` when it disagrees with the one
/// at `step / 2`, which happens when a kink lies within one step.
fn slope(full: (f64, f64), half: (f64, f64), step: f64) -> Option<f64> {
    let coarse = (full.0 - full.1) / (2.0 * step);
    let fine = (half.0 - half.1) / step;
    let kink = (coarse - fine).abs() > 1e-4 * (coarse.abs() + fine.abs()) + 1e-9;
    (!kink).then_some(coarse)
}

fn positions(len: usize, limit: Option<usize>) -> Vec<usize> {
    match limit {
        Some(k) if k < len => (0..k).map(|i| i * len / k).collect(),
        _ => (0..len).collect(),
    }
}

fn tensor_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| math::sqrt(v.iter().map(|x| x * x).sum());
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, n)| a - n).collect();
    norm(&diff) / norm(analytic).max(norm(numeric)).max(1e-6)
}

/// Compares the analytic gradient of the scalar built by `f` against
/// central differences with step `step`, for every input and every
/// parameter of `params`.
///
/// Entries whose central difference is unstable at `step` because a kink
/// (ReLU, max) lies within one step are retried at `step / 100`; entries
/// still unstable are reported in [`GradCheckReport::skipped`].
///
/// `f` receives the graph, the parameter store and one input leaf per entry
/// of `inputs`. With `limit = Some(k)` at most `k` evenly spaced entries of
/// each tensor are perturbed.
pub fn check_gradients<F>(
    inputs: &[Array2],
    params: &Params,
    step: f64,
    limit: Option<usize>,
    f: F,
) -> Result<GradCheckReport, NnError>
where
    F: Fn(&mut Graph, &Params, &[Var]) -> Result<Var, NnError>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|a| g.input(a.clone())).collect();
    let loss = f(&mut g, params, &vars)?;
    g.backward(loss)?;
    let param_grads = g.param_grads();

    let mut report = GradCheckReport { max_rel_error: 0.0, worst: String::new(), checked: 0, skipped: 0 };
    let mut record = |label: String, grad: &[f64], idx: &[usize], numeric: Vec<Option<f64>>| {
        let mut analytic = Vec::with_capacity(idx.len());
        let mut kept = Vec::with_capacity(idx.len());
        for (&i, n) in idx.iter().zip(numeric) {
            match n {
                Some(n) => {
                    analytic.push(grad[i]);
                    kept.push(n);
                }
                None => report.skipped += 1,
            }
        }
        let err = tensor_error(&analytic, &kept);
        report.checked += analytic.len();
        if err > report.max_rel_error || report.worst.is_empty() {
            report.max_rel_error = report.max_rel_error.max(err);
            report.worst = label;
        }
    };

    for (t, input) in inputs.iter().enumerate() {
        let zeros = Array2::zeros(input.rows(), input.cols());
        let grad = g.grad(vars[t]).unwrap_or(&zeros);
        let idx = positions(input.data().len(), limit);
        let mut numeric = Vec::with_capacity(idx.len());
        let mut shifted = inputs.to_vec();
        for &i in &idx {
            let orig = input.data()[i];
            let mut at = |delta: f64| {
                shifted[t].data_mut()[i] = orig + delta;
                evaluate(&shifted, params, &f)
            };
            let mut value = None;
            for h in [step, step / 100.0] {
                let full = (at(h)?, at(-h)?);
                let half = (at(h / 2.0)?, at(-h / 2.0)?);
                value = slope(full, half, h);
                if value.is_some() {
                    break;
                }
            }
            shifted[t].data_mut()[i] = orig;
            numeric.push(value);
        }
        record(format!("input[{t}]"), grad.data(), &idx, numeric);
    }

    let mut perturbed = params.clone();
    for id in params.ids() {
        let value = params.value(id);
        let zeros = Array2::zeros(value.rows(), value.cols());
        let grad = param_grads.get(id).unwrap_or(&zeros);
        let idx = positions(value.data().len(), limit);
        let mut numeric = Vec::with_capacity(idx.len());
        for &i in &idx {
            let orig = value.data()[i];
            let mut at = |delta: f64| {
                perturbed.value_mut(id).data_mut()[i] = orig + delta;
                evaluate(inputs, &perturbed, &f)
            };
            let mut value = None;
            for h in [step, step / 100.0] {
                let full = (at(h)?, at(-h)?);
                let half = (at(h / 2.0)?, at(-h / 2.0)?);
                value = slope(full, half, h);
                if value.is_some() {
                    break;
                }
            }
            perturbed.value_mut(id).data_mut()[i] = orig;
            numeric.push(value);
        }
        record(String::from(params.name(id)), grad.data(), &idx, numeric);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn check<F>(inputs: &[Array2], f: F)
    where
        F: Fn(&mut Graph, &[Var]) -> Result<Var, NnError>,
    {
        let params = Params::new();
        let report = check_gradients(inputs, &params, 1e-4, None, |g, _, v| f(g, v)).unwrap();
        assert!(report.passes(1e-3), "{report:?}");
        assert!(report.checked > 0);
    }

    /// Reduces any array to a scalar with a fixed, non-symmetric weighting so
    /// that every entry of the upstream gradient differs.
    fn weighted_sum(g: &mut Graph, x: Var) -> Result<Var, NnError> {
        let (r, c) = g.value(x).shape();
        let w = Array2::from_vec(r, c, (0..r * c).map(|i| 0.3 + 0.17 * i as f64 - 0.01 * (i * i) as f64).collect())?;
        let w = g.constant(w);
        let p = g.mul(x, w)?;
        Ok(g.sum_all(p))
    }

    const SHAPES: [(usize, usize); 5] = [(1, 1), (2, 3), (4, 2), (3, 5), (5, 4)];

    #[test]
    fn unary_ops() {
        for (s, &(r, c)) in SHAPES.iter().enumerate() {
            let mut rng = seeded(100 + s as u64);
            let x = random_array(r, c, 1.0, &mut rng);
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.relu(v[0]);
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.sigmoid(v[0]);
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.softmax_rows(v[0]);
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.softmax_cols(v[0]);
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.transpose(v[0]);
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.reshape(v[0], c, r)?;
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.tile_rows(v[0], 3)?;
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.max_over_rows(v[0])?;
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.scale(v[0], -1.7);
                let y = g.add_scalar(y, 0.4);
                let y = g.square(y);
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| Ok(g.mean_all(v[0])));
            check(core::slice::from_ref(&x), |g, v| {
                let idx: Vec<usize> = (0..r + 2).map(|i| (i * 7) % r).collect();
                let y = g.gather_rows(v[0], &idx)?;
                weighted_sum(g, y)
            });
            check(core::slice::from_ref(&x), |g, v| {
                let y = g.row_norms(v[0]);
                weighted_sum(g, y)
            });
        }
    }

    #[test]
    fn max_pool_groups_gradient() {
        let mut rng = seeded(7);
        let x = random_array(6, 3, 1.0, &mut rng);
        check(&[x], |g, v| {
            let y = g.max_pool_groups(v[0], 2)?;
            weighted_sum(g, y)
        });
    }

    #[test]
    fn binary_ops() {
        for (s, &(r, c)) in SHAPES.iter().enumerate() {
            let mut rng = seeded(200 + s as u64);
            let a = random_array(r, c, 1.0, &mut rng);
            let b = random_array(r, c, 1.0, &mut rng);
            let inputs = [a, b];
            check(&inputs, |g, v| {
                let y = g.add(v[0], v[1])?;
                weighted_sum(g, y)
            });
            check(&inputs, |g, v| {
                let y = g.sub(v[0], v[1])?;
                weighted_sum(g, y)
            });
            check(&inputs, |g, v| {
                let y = g.mul(v[0], v[1])?;
                weighted_sum(g, y)
            });
            check(&inputs, |g, v| {
                let y = g.concat_cols(&[v[0], v[1], v[0]])?;
                weighted_sum(g, y)
            });
        }
    }

    #[test]
    fn matmul_and_linear() {
        for (s, &(m, k)) in SHAPES.iter().enumerate() {
            let mut rng = seeded(300 + s as u64);
            let n = 1 + s;
            let a = random_array(m, k, 1.0, &mut rng);
            let b = random_array(k, n, 1.0, &mut rng);
            let bias = random_array(1, n, 1.0, &mut rng);
            check(&[a.clone(), b.clone()], |g, v| {
                let y = g.matmul(v[0], v[1])?;
                weighted_sum(g, y)
            });
            check(&[a, b, bias], |g, v| {
                let y = g.linear(v[0], v[1], v[2])?;
                weighted_sum(g, y)
            });
        }
    }

    #[test]
    fn reused_nodes_accumulate() {
        let mut rng = seeded(9);
        let x = random_array(3, 3, 1.0, &mut rng);
        check(&[x], |g, v| {
            let y = g.matmul(v[0], v[0])?;
            let t = g.transpose(v[0]);
            let z = g.add(y, t)?;
            weighted_sum(g, z)
        });
    }

    #[test]
    fn detects_blocked_gradient() {
        // the loss depends on x numerically, but routing it through a
        // constant hides it from the analytic gradient
        let params = Params::new();
        let report = check_gradients(&[Array2::scalar(1.0)], &params, 1e-4, None, |g, _, v| {
            let c = g.constant(g.value(v[0]).clone());
            Ok(g.square(c))
        })
        .unwrap();
        assert!(report.max_rel_error > 0.5, "{report:?}");
    }
}
