use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::{Graph, NnError, ParamId, Params, Var};

/// Shared per-point affine layer (`fan_in -> fan_out`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl Linear {
    /// Registers `{name}.w` (Glorot uniform) and `{name}.b` (zeros).
    pub fn new<R: Rng + ?Sized>(params: &mut Params, name: &str, fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let weight = params.add_glorot(format!("{name}.w"), fan_in, fan_out, rng);
        let bias = params.add_zeros(format!("{name}.b"), 1, fan_out);
        Self { weight, bias, fan_in, fan_out }
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, x: Var) -> Result<Var, NnError> {
        let w = g.param(params, self.weight);
        let b = g.param(params, self.bias);
        g.linear(x, w, b)
    }
}

/// A stack of shared per-point layers with ReLU between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    /// Whether a ReLU also follows the last layer.
    pub relu_last: bool,
}

impl Mlp {
    /// Layers `widths[0] -> widths[1] -> ...`, named `{name}.0`, `{name}.1`, ...
    pub fn new<R: Rng + ?Sized>(params: &mut Params, name: &str, widths: &[usize], relu_last: bool, rng: &mut R) -> Self {
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| Linear::new(params, &format!("{name}.{i}"), w[0], w[1], rng))
            .collect();
        Self { layers, relu_last }
    }

    pub fn out_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.fan_out)
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, mut x: Var) -> Result<Var, NnError> {
        let last = self.layers.len().saturating_sub(1);
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(g, params, x)?;
            if i < last || self.relu_last {
                x = g.relu(x);
            }
        }
        Ok(x)
    }
}

/// Residual self-attention over the rows of an `N x C` feature map.
///
/// `G` and `H` project to `max(1, C / 4)` channels and `K` keeps `C`.
/// The weights `W = softmax_rows(G H^T)` are `N x N` and row-stochastic,
/// and the output is `X + W^T K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfAttention {
    pub g: Linear,
    pub h: Linear,
    pub k: Linear,
}

impl SelfAttention {
    pub fn new<R: Rng + ?Sized>(params: &mut Params, name: &str, channels: usize, rng: &mut R) -> Self {
        let inner = (channels / 4).max(1);
        Self {
            g: Linear::new(params, &format!("{name}.g"), channels, inner, rng),
            h: Linear::new(params, &format!("{name}.h"), channels, inner, rng),
            k: Linear::new(params, &format!("{name}.k"), channels, channels, rng),
        }
    }

    /// The attention weights `W` together with the output.
    pub fn forward_with_weights(&self, g: &mut Graph, params: &Params, x: Var) -> Result<(Var, Var), NnError> {
        let gv = self.g.forward(g, params, x)?;
        let hv = self.h.forward(g, params, x)?;
        let kv = self.k.forward(g, params, x)?;
        let ht = g.transpose(hv);
        let scores = g.matmul(gv, ht)?;
        let w = g.softmax_rows(scores);
        let wt = g.transpose(w);
        let weighted = g.matmul(wt, kv)?;
        let out = g.add(x, weighted)?;
        Ok((w, out))
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, x: Var) -> Result<Var, NnError> {
        self.forward_with_weights(g, params, x).map(|(_, out)| out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{check_gradients, jitter_params, random_array};
    use crate::nn::Array2;
    use crate::rng::seeded;

    fn attention(n: usize, c: usize, seed: u64) -> (Params, SelfAttention, Array2) {
        let mut rng = seeded(seed);
        let mut params = Params::new();
        let att = SelfAttention::new(&mut params, "att", c, &mut rng);
        (params, att, random_array(n, c, 1.0, &mut rng))
    }

    #[test]
    fn zero_k_is_identity() {
        let (mut params, att, x) = attention(5, 8, 1);
        params.value_mut(att.k.weight).data_mut().iter_mut().for_each(|v| *v = 0.0);
        let mut g = Graph::new();
        let xv = g.input(x.clone());
        let out = att.forward(&mut g, &params, xv).unwrap();
        assert_eq!(g.value(out), &x);
    }

    #[test]
    fn single_row_adds_k() {
        let (params, att, x) = attention(1, 4, 2);
        let mut g = Graph::new();
        let xv = g.input(x.clone());
        let (w, out) = att.forward_with_weights(&mut g, &params, xv).unwrap();
        assert_eq!(g.value(w).data(), &[1.0]);
        let k = att.k.forward(&mut g, &params, xv).unwrap();
        for c in 0..4 {
            assert!((g.value(out).get(0, c) - x.get(0, c) - g.value(k).get(0, c)).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_are_row_stochastic() {
        let (params, att, x) = attention(7, 8, 3);
        let mut g = Graph::new();
        let xv = g.input(x);
        let (w, _) = att.forward_with_weights(&mut g, &params, xv).unwrap();
        for r in 0..7 {
            assert!((g.value(w).row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_equivariant() {
        let (params, att, x) = attention(6, 8, 4);
        let perm = [3, 0, 5, 1, 4, 2];
        let mut px = Array2::zeros(6, 8);
        for (i, &p) in perm.iter().enumerate() {
            px.row_mut(i).copy_from_slice(x.row(p));
        }
        let mut g = Graph::new();
        let a = g.input(x);
        let b = g.input(px);
        let oa = att.forward(&mut g, &params, a).unwrap();
        let ob = att.forward(&mut g, &params, b).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            for c in 0..8 {
                assert!((g.value(ob).get(i, c) - g.value(oa).get(p, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attention_gradients() {
        for (n, c, seed) in [(5, 4, 10), (6, 8, 11), (3, 5, 12), (4, 2, 13), (2, 8, 14)] {
            let (mut params, att, x) = attention(n, c, seed);
            jitter_params(&mut params, 0.1, &mut seeded(seed + 100));
            let report = check_gradients(&[x], &params, 1e-4, None, |g, p, v| {
                let out = att.forward(g, p, v[0])?;
                let sq = g.square(out);
                Ok(g.sum_all(sq))
            })
            .unwrap();
            assert!(report.passes(1e-3), "n={n} c={c}: {report:?}");
        }
    }

    #[test]
    fn mlp_gradients() {
        let mut rng = seeded(5);
        let mut params = Params::new();
        let mlp = Mlp::new(&mut params, "mlp", &[3, 6, 4], true, &mut rng);
        let x = random_array(7, 3, 1.0, &mut rng);
        jitter_params(&mut params, 0.1, &mut rng);
        let report = check_gradients(&[x], &params, 1e-4, None, |g, p, v| {
            let y = mlp.forward(g, p, v[0])?;
            Ok(g.sum_all(y))
        })
        .unwrap();
        assert!(report.passes(1e-3), "{report:?}");
        assert_eq!(mlp.out_width(), 4);
        assert_eq!(params.len(), 4);
    }
}
