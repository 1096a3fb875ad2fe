use alloc::vec::Vec;

use rand::Rng;

use super::ModelError;
use crate::nn::{Array2, Graph, Mlp, Params, SelfAttention, Var};

/// Discriminator widths.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorConfig {
    /// Width of the first per-point features.
    pub c_d: usize,
    /// Width of the second per-point features.
    pub c_d_prime: usize,
    /// Fully connected head, from `c_d_prime` down to a single value.
    pub head: Vec<usize>,
    /// Self-attention after the local/global concatenation.
    pub attention: bool,
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        Self { c_d: 64, c_d_prime: 256, head: alloc::vec![256, 64, 1], attention: true }
    }
}

impl DiscriminatorConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.c_d == 0 || self.c_d_prime == 0 {
            return Err(ModelError::BadConfig("discriminator widths must be positive"));
        }
        if self.head.len() < 2 || self.head[0] != self.c_d_prime || self.head.last() != Some(&1) {
            return Err(ModelError::BadConfig("head must run from c_d_prime down to 1"));
        }
        if self.head.contains(&0) {
            return Err(ModelError::BadConfig("head widths must be positive"));
        }
        Ok(())
    }
}

/// Scores a point set with a confidence in `(0, 1)` that it is real.
///
/// Per-point features are max-pooled into a global vector, which is tiled
/// back and concatenated to every point, mixed by self-attention, lifted
/// again and max-pooled; a fully connected head and a sigmoid give the
/// score. Every step is symmetric in the rows, so the score does not
/// depend on point order.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub config: DiscriminatorConfig,
    pub local: Mlp,
    pub attention: Option<SelfAttention>,
    pub lift: Mlp,
    pub head: Mlp,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(cfg: DiscriminatorConfig, params: &mut Params, rng: &mut R) -> Result<Self, ModelError> {
        cfg.validate()?;
        let local = Mlp::new(params, "local", &[3, cfg.c_d, cfg.c_d], true, rng);
        let attention = cfg.attention.then(|| SelfAttention::new(params, "att", 2 * cfg.c_d, rng));
        let lift = Mlp::new(params, "lift", &[2 * cfg.c_d, cfg.c_d_prime, cfg.c_d_prime], true, rng);
        let head = Mlp::new(params, "head", &cfg.head, false, rng);
        Ok(Self { config: cfg, local, attention, lift, head })
    }

    /// The pre-sigmoid logit (`1 x 1`).
    pub fn logit(&self, g: &mut Graph, params: &Params, q: Var) -> Result<Var, ModelError> {
        let (rows, cols) = g.value(q).shape();
        if rows == 0 || cols != 3 {
            return Err(ModelError::WrongSize { expected: rows.max(1), got: rows });
        }
        let local = self.local.forward(g, params, q)?;
        let global = g.max_over_rows(local)?;
        let tiled = g.tile_rows(global, rows)?;
        let mut x = g.concat_cols(&[local, tiled])?;
        if let Some(att) = &self.attention {
            x = att.forward(g, params, x)?;
        }
        let lifted = self.lift.forward(g, params, x)?;
        let pooled = g.max_over_rows(lifted)?;
        Ok(self.head.forward(g, params, pooled)?)
    }

    /// The confidence `D(q)` (`1 x 1`).
    pub fn forward(&self, g: &mut Graph, params: &Params, q: Var) -> Result<Var, ModelError> {
        let logit = self.logit(g, params, q)?;
        Ok(g.sigmoid(logit))
    }

    /// Confidence for a plain `n x 3` array.
    pub fn discriminate(&self, params: &Params, q: &Array2) -> Result<f64, ModelError> {
        let mut g = Graph::new();
        let q = g.constant(q.clone());
        let d = self.forward(&mut g, params, q)?;
        Ok(g.value(d).item())
    }
}
