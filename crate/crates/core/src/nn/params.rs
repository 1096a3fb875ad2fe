use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{Array2, NnError};
use crate::math;

/// Index of a parameter inside a [`Params`] store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    name: String,
    value: Array2,
    grad: Array2,
    m: Array2,
    v: Array2,
}

/// Named trainable tensors with accumulated gradients and Adam moments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    entries: Vec<Entry>,
    step: u64,
}

/// Per-parameter gradients produced by one graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamGrads {
    grads: Vec<(ParamId, Array2)>,
}

impl ParamGrads {
    pub(crate) fn add(&mut self, id: ParamId, g: &Array2) {
        match self.grads.iter_mut().find(|(p, _)| *p == id) {
            Some((_, acc)) => acc.add_assign(g),
            None => self.grads.push((id, g.clone())),
        }
    }

    pub fn get(&self, id: ParamId) -> Option<&Array2> {
        self.grads.iter().find(|(p, _)| *p == id).map(|(_, g)| g)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Array2)> {
        self.grads.iter().map(|(p, g)| (*p, g))
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().all(|(_, g)| g.is_finite())
    }
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Array2) -> ParamId {
        let (r, c) = value.shape();
        self.entries.push(Entry {
            name: name.into(),
            value,
            grad: Array2::zeros(r, c),
            m: Array2::zeros(r, c),
            v: Array2::zeros(r, c),
        });
        ParamId(self.entries.len() - 1)
    }

    /// Glorot-uniform weights in `+-sqrt(6 / (fan_in + fan_out))`.
    pub fn add_glorot<R: Rng + ?Sized>(&mut self, name: impl Into<String>, fan_in: usize, fan_out: usize, rng: &mut R) -> ParamId {
        let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
        let data = (0..fan_in * fan_out).map(|_| rng.random_range(-limit..=limit)).collect();
        self.add(name, Array2::from_vec(fan_in, fan_out, data).expect("shape"))
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> ParamId {
        self.add(name, Array2::zeros(rows, cols))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|e| e.name == name).map(ParamId)
    }

    pub fn value(&self, id: ParamId) -> &Array2 {
        &self.entries[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Array2 {
        &mut self.entries[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Array2 {
        &self.entries[id.0].grad
    }

    /// Total number of scalars across all parameters.
    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|e| e.value.data().len()).sum()
    }

    /// Scalars held by parameters whose name starts with `prefix`.
    pub fn scalar_count_with_prefix(&self, prefix: &str) -> usize {
        self.entries.iter().filter(|e| e.name.starts_with(prefix)).map(|e| e.value.data().len()).sum()
    }

    /// Adam steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Adds `scale * grads` into the accumulated gradients.
    pub fn accumulate(&mut self, grads: &ParamGrads, scale: f64) {
        for (id, g) in grads.iter() {
            let acc = &mut self.entries[id.0].grad;
            for (a, v) in acc.data_mut().iter_mut().zip(g.data()) {
                *a += scale * v;
            }
        }
    }

    pub fn zero_grads(&mut self) {
        for e in &mut self.entries {
            e.grad.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// One bias-corrected Adam update from the accumulated gradients, which
    /// are cleared afterwards.
    pub fn adam_step(&mut self, lr: f64, cfg: AdamConfig) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - math::powi(cfg.beta1, t);
        let c2 = 1.0 - math::powi(cfg.beta2, t);
        for e in &mut self.entries {
            let n = e.value.data().len();
            let (value, grad, m, v) = (e.value.data_mut(), e.grad.data_mut(), e.m.data_mut(), e.v.data_mut());
            for i in 0..n {
                let g = grad[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                value[i] -= lr * m_hat / (math::sqrt(v_hat) + cfg.eps);
                grad[i] = 0.0;
            }
        }
    }

    /// Replaces every value from `(name, array)` pairs; names and shapes must
    /// match this store exactly.
    pub fn load_values(&mut self, values: Vec<(String, Array2)>) -> Result<(), NnError> {
        if values.len() != self.entries.len() {
            return Err(NnError::ParamMismatch(alloc::format!(
                "expected {} tensors, found {}",
                self.entries.len(),
                values.len()
            )));
        }
        for (e, (name, value)) in self.entries.iter_mut().zip(values) {
            if e.name != name || e.value.shape() != value.shape() {
                return Err(NnError::ParamMismatch(alloc::format!(
                    "tensor {} {:?} does not match {} {:?}",
                    name,
                    value.shape(),
                    e.name,
                    e.value.shape()
                )));
            }
            e.value = value;
        }
        Ok(())
    }

    /// `(name, value)` pairs in creation order.
    pub fn named_values(&self) -> impl Iterator<Item = (&str, &Array2)> {
        self.entries.iter().map(|e| (e.name.as_str(), &e.value))
    }

    /// The first moment of a parameter (for inspection in tests).
    pub fn first_moment(&self, id: ParamId) -> &Array2 {
        &self.entries[id.0].m
    }

    pub fn second_moment(&self, id: ParamId) -> &Array2 {
        &self.entries[id.0].v
    }
}
