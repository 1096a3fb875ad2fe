//! Training objectives: least-squares adversarial losses, the uniform loss,
//! the EMD reconstruction loss and their weighted combination.
//!
//! Discrete choices (farthest-point seeds, ball membership, nearest-neighbor
//! partners, the EMD matching) are made from the current values and frozen,
//! so gradients flow through the continuous distances only.

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{PointCloud, SpatialIndex};
use crate::metrics::{crop_ball_subsets, emd_approx, Matching, MetricError, Subset, UNIFORMITY_PERCENTAGES};
use crate::model::{array_to_cloud, array_to_points};
use crate::nn::{Array2, Graph, NnError, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error("size mismatch: {left} vs {right} points")]
    SizeMismatch { left: usize, right: usize },
}

/// Weights of the generator objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub gan: f64,
    pub rec: f64,
    pub uni: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { gan: 0.5, rec: 100.0, uni: 10.0 }
    }
}

/// Percentages and seed count of the uniform loss.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformLossConfig {
    pub percentages: Vec<f64>,
    pub seeds: usize,
}

impl Default for UniformLossConfig {
    fn default() -> Self {
        Self { percentages: UNIFORMITY_PERCENTAGES.to_vec(), seeds: 50 }
    }
}

/// Generator adversarial loss `(D(Q) - 1)^2 / 2`.
pub fn adv_loss_g(g: &mut Graph, d_fake: Var) -> Var {
    let shifted = g.add_scalar(d_fake, -1.0);
    let sq = g.square(shifted);
    g.scale(sq, 0.5)
}

/// Discriminator loss `(D(Q)^2 + (D(Q_hat) - 1)^2) / 2`.
pub fn adv_loss_d(g: &mut Graph, d_fake: Var, d_real: Var) -> Result<Var, NnError> {
    let fake = g.square(d_fake);
    let shifted = g.add_scalar(d_real, -1.0);
    let real = g.square(shifted);
    let sum = g.add(fake, real)?;
    Ok(g.scale(sum, 0.5))
}

/// Ball-cropped subsets of `points` for every configured percentage.
pub fn uniform_subsets(points: &PointCloud, cfg: &UniformLossConfig) -> Result<Vec<Subset>, LossError> {
    let index = SpatialIndex::build(points)?;
    let mut subsets = Vec::new();
    for &p in &cfg.percentages {
        subsets.extend(crop_ball_subsets(points.points(), &index, p, cfg.seeds)?);
    }
    Ok(subsets)
}

/// Uniform loss over given frozen subsets: for each subset the imbalance
/// (a constant) times the clutter of its nearest-neighbor distances.
pub fn uniform_loss_with_subsets(g: &mut Graph, q: Var, subsets: &[Subset]) -> Result<Var, LossError> {
    let mut members = Vec::new();
    let mut partners = Vec::new();
    let mut d_hat = Vec::new();
    let mut weight = Vec::new();
    for s in subsets {
        let Some(dh) = s.d_hat() else { continue };
        let w = s.imbalance() / dh;
        members.extend_from_slice(&s.members);
        partners.extend_from_slice(&s.partners);
        d_hat.extend(core::iter::repeat_n(dh, s.members.len()));
        weight.extend(core::iter::repeat_n(w, s.members.len()));
    }
    if members.is_empty() {
        return Ok(g.constant(Array2::scalar(0.0)));
    }
    let rows = members.len();
    let a = g.gather_rows(q, &members)?;
    let b = g.gather_rows(q, &partners)?;
    let diff = g.sub(a, b)?;
    let dist = g.row_norms(diff);
    let d_hat = g.constant(Array2::from_vec(rows, 1, d_hat)?);
    let weight = g.constant(Array2::from_vec(rows, 1, weight)?);
    let dev = g.sub(dist, d_hat)?;
    let sq = g.square(dev);
    let weighted = g.mul(sq, weight)?;
    Ok(g.sum_all(weighted))
}

/// Uniform loss of the `rN x 3` points `q`, summed over all percentages.
pub fn uniform_loss(g: &mut Graph, q: Var, cfg: &UniformLossConfig) -> Result<Var, LossError> {
    let cloud = array_to_cloud(g.value(q))?;
    let subsets = uniform_subsets(&cloud, cfg)?;
    uniform_loss_with_subsets(g, q, &subsets)
}

/// `sum_i |q_i - target[assignment[i]]|` with the assignment held fixed.
pub fn reconstruction_loss_matched(
    g: &mut Graph,
    q: Var,
    target: &PointCloud,
    matching: &Matching,
) -> Result<Var, LossError> {
    let rows = g.value(q).rows();
    if rows != target.len() || matching.assignment.len() != rows {
        return Err(LossError::SizeMismatch { left: rows, right: target.len() });
    }
    let mut matched = Array2::zeros(rows, 3);
    for (r, &j) in matching.assignment.iter().enumerate() {
        matched.row_mut(r).copy_from_slice(&target[j].to_array());
    }
    let t = g.constant(matched);
    let diff = g.sub(q, t)?;
    let dist = g.row_norms(diff);
    Ok(g.sum_all(dist))
}

/// EMD reconstruction loss against `target`, matching with the auction
/// solver at accuracy `eps`. Returns the matching alongside the loss.
pub fn reconstruction_loss(
    g: &mut Graph,
    q: Var,
    target: &PointCloud,
    eps: f64,
) -> Result<(Var, Matching), LossError> {
    let rows = g.value(q).rows();
    if rows != target.len() {
        return Err(LossError::SizeMismatch { left: rows, right: target.len() });
    }
    let cloud = PointCloud::new(array_to_points(g.value(q)))?;
    let matching = emd_approx(&cloud, target, eps)?;
    let loss = reconstruction_loss_matched(g, q, target, &matching)?;
    Ok((loss, matching))
}

/// `w.gan * adv + w.rec * rec + w.uni * uni`.
pub fn compound_g(g: &mut Graph, adv: Var, rec: Var, uni: Var, w: &LossWeights) -> Result<Var, NnError> {
    let a = g.scale(adv, w.gan);
    let r = g.scale(rec, w.rec);
    let u = g.scale(uni, w.uni);
    let sum = g.add(a, r)?;
    g.add(sum, u)
}
