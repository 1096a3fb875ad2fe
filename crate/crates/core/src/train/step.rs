use alloc::vec::Vec;

use super::{augment, sample_input, PatchPair, TrainConfig, TrainError};
use crate::geometry::PointCloud;
use crate::losses::{
    adv_loss_d, adv_loss_g, compound_g, reconstruction_loss, uniform_loss, LossWeights, UniformLossConfig,
};
use crate::model::{points_to_array, Discriminator, Generator};
use crate::nn::{Array2, Graph, ParamGrads, Params};
use crate::rng::{choose_distinct, derive};

const STREAM_GENERATOR: u64 = 1;
const STREAM_DISCRIMINATOR: u64 = 2;
const STREAM_SHUFFLE: u64 = 1 << 40;
const STREAM_SAMPLE: u64 = 1 << 41;

/// Runs `f(0..count)` and returns the results in index order.
///
/// Implementations may run the calls concurrently; results must not depend
/// on scheduling.
pub trait SampleMap {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every call on the current thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl SampleMap for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// The generator, the optional discriminator and their parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gan {
    pub generator: Generator,
    pub discriminator: Option<Discriminator>,
    pub g_params: Params,
    pub d_params: Params,
}

impl Gan {
    /// Fresh networks initialized from `cfg.seed`. The discriminator is
    /// absent when ablated.
    pub fn new(cfg: &TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        let mut g_params = Params::new();
        let generator = Generator::new(cfg.generator_config(), &mut g_params, &mut derive(cfg.seed, STREAM_GENERATOR))?;
        let mut d_params = Params::new();
        let discriminator = if cfg.ablations.discriminator {
            None
        } else {
            Some(Discriminator::new(
                cfg.discriminator_config(),
                &mut d_params,
                &mut derive(cfg.seed, STREAM_DISCRIMINATOR),
            )?)
        };
        Ok(Self { generator, discriminator, g_params, d_params })
    }
}

/// Gradients and losses of the generator objective on one pair.
#[derive(Debug, Clone)]
pub struct GeneratorSample {
    pub grads: ParamGrads,
    /// The generated `rN x 3` points.
    pub fake: Array2,
    pub total: f64,
    pub adv: f64,
    pub rec: f64,
    pub uni: f64,
    /// `D(fake)` when a discriminator is present.
    pub d_fake: Option<f64>,
}

/// Generator objective on one pair. The discriminator is evaluated with
/// its parameters held constant, so only generator gradients are collected.
pub fn generator_pass(
    gan: &Gan,
    input: &PointCloud,
    target: &PointCloud,
    weights: &LossWeights,
    uniform: &UniformLossConfig,
    emd_eps: f64,
) -> Result<GeneratorSample, TrainError> {
    let mut g = Graph::new();
    let p = g.constant(points_to_array(input.points()));
    let out = gan.generator.forward(&mut g, &gan.g_params, p)?;
    let q = out.points;
    let (rec, _) = reconstruction_loss(&mut g, q, target, emd_eps)?;
    let uni = if weights.uni > 0.0 { uniform_loss(&mut g, q, uniform)? } else { g.constant(Array2::scalar(0.0)) };
    let (adv, d_fake) = match &gan.discriminator {
        Some(d) => {
            g.set_frozen(true);
            let score = d.forward(&mut g, &gan.d_params, q);
            g.set_frozen(false);
            let score = score?;
            let value = g.value(score).item();
            (adv_loss_g(&mut g, score), Some(value))
        }
        None => (g.constant(Array2::scalar(0.0)), None),
    };
    let total = compound_g(&mut g, adv, rec, uni, weights)?;
    g.backward(total)?;
    Ok(GeneratorSample {
        grads: g.param_grads(),
        fake: g.value(q).clone(),
        total: g.value(total).item(),
        adv: g.value(adv).item(),
        rec: g.value(rec).item(),
        uni: g.value(uni).item(),
        d_fake,
    })
}

/// Gradients and loss of the discriminator objective on one pair.
#[derive(Debug, Clone)]
pub struct DiscriminatorSample {
    pub grads: ParamGrads,
    pub loss: f64,
    pub d_fake: f64,
    pub d_real: f64,
}

/// Discriminator objective on generated points `fake` and the target `real`.
pub fn discriminator_pass(
    discriminator: &Discriminator,
    params: &Params,
    fake: &Array2,
    real: &PointCloud,
) -> Result<DiscriminatorSample, TrainError> {
    let mut g = Graph::new();
    let f = g.constant(fake.clone());
    let r = g.constant(points_to_array(real.points()));
    let d_fake = discriminator.forward(&mut g, params, f)?;
    let d_real = discriminator.forward(&mut g, params, r)?;
    let loss = adv_loss_d(&mut g, d_fake, d_real)?;
    g.backward(loss)?;
    Ok(DiscriminatorSample {
        grads: g.param_grads(),
        loss: g.value(loss).item(),
        d_fake: g.value(d_fake).item(),
        d_real: g.value(d_real).item(),
    })
}

/// Batch means of one training iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub iteration: u64,
    /// Learning rate passed to the generator update.
    pub lr_g: f64,
    /// Learning rate passed to the discriminator update (absent when ablated).
    pub lr_d: Option<f64>,
    pub batch: Vec<usize>,
    pub loss_g: f64,
    pub loss_adv: f64,
    pub loss_rec: f64,
    pub loss_uni: f64,
    pub loss_d: Option<f64>,
    pub d_real: Option<f64>,
    pub d_fake: Option<f64>,
}

/// Alternating generator/discriminator optimization.
///
/// Each iteration draws a batch from an epoch-wise shuffle, resamples and
/// augments every pair from its own derived seed, averages per-sample
/// gradients in batch order and takes one Adam step for each network. The
/// discriminator sees the generator output computed before the generator
/// update. Results are identical however the per-sample work is scheduled.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub cfg: TrainConfig,
    pub gan: Gan,
    /// Completed iterations.
    pub iteration: u64,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self, TrainError> {
        let gan = Gan::new(&cfg)?;
        Ok(Self { cfg, gan, iteration: 0 })
    }

    /// Dataset indices of the batch at 1-based `iteration`.
    pub fn batch_indices(&self, iteration: u64, dataset_len: usize) -> Vec<usize> {
        let batch = self.cfg.batch;
        let per_epoch = dataset_len.div_ceil(batch) as u64;
        let epoch = (iteration - 1) / per_epoch;
        let position = ((iteration - 1) % per_epoch) as usize;
        let order = choose_distinct(&mut derive(self.cfg.seed, STREAM_SHUFFLE + epoch), dataset_len, dataset_len);
        (0..batch).map(|j| order[(position * batch + j) % dataset_len]).collect()
    }

    /// The resampled, augmented pairs of the batch at 1-based `iteration`.
    pub fn prepare_batch(&self, dataset: &[PatchPair], iteration: u64) -> Result<Vec<PatchPair>, TrainError> {
        if dataset.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        self.batch_indices(iteration, dataset.len())
            .into_iter()
            .enumerate()
            .map(|(j, idx)| {
                let stream = STREAM_SAMPLE + (iteration - 1) * self.cfg.batch as u64 + j as u64;
                let mut rng = derive(self.cfg.seed, stream);
                let pair = &dataset[idx];
                let fresh = PatchPair { input: sample_input(&pair.target, self.cfg.n, &mut rng)?, ..pair.clone() };
                Ok(augment(&fresh, &self.cfg, &mut rng))
            })
            .collect()
    }

    /// One generator update followed by one discriminator update.
    pub fn step<M: SampleMap>(&mut self, dataset: &[PatchPair], map: &M) -> Result<StepReport, TrainError> {
        let iteration = self.iteration + 1;
        let pairs = self.prepare_batch(dataset, iteration)?;
        let batch = self.batch_indices(iteration, dataset.len());
        let non_finite = |stage| TrainError::NonFinite { iteration, stage, batch: batch.clone() };
        let weights = self.cfg.loss_weights();
        let uniform = self.cfg.uniform_config();
        let scale = 1.0 / pairs.len() as f64;

        let gan = &self.gan;
        let emd_eps = self.cfg.emd_eps;
        let g_samples = map.map(pairs.len(), |i| {
            generator_pass(gan, &pairs[i].input, &pairs[i].target, &weights, &uniform, emd_eps)
        });
        let g_samples = g_samples.into_iter().collect::<Result<Vec<_>, _>>()?;
        if g_samples.iter().any(|s| !s.total.is_finite() || !s.grads.is_finite()) {
            return Err(non_finite("generator"));
        }

        let d_samples = match &gan.discriminator {
            Some(d) => {
                let d_params = &gan.d_params;
                let samples = map.map(pairs.len(), |i| discriminator_pass(d, d_params, &g_samples[i].fake, &pairs[i].target));
                let samples = samples.into_iter().collect::<Result<Vec<_>, _>>()?;
                if samples.iter().any(|s| !s.loss.is_finite() || !s.grads.is_finite()) {
                    return Err(non_finite("discriminator"));
                }
                Some(samples)
            }
            None => None,
        };

        let adam = self.cfg.adam();
        let lr_g = self.cfg.learning_rate(self.cfg.lr_g, iteration);
        self.gan.g_params.zero_grads();
        for s in &g_samples {
            self.gan.g_params.accumulate(&s.grads, scale);
        }
        self.gan.g_params.adam_step(lr_g, adam);

        let mut lr_d = None;
        if let Some(samples) = &d_samples {
            let lr = self.cfg.learning_rate(self.cfg.lr_d, iteration);
            self.gan.d_params.zero_grads();
            for s in samples {
                self.gan.d_params.accumulate(&s.grads, scale);
            }
            self.gan.d_params.adam_step(lr, adam);
            lr_d = Some(lr);
        }
        self.iteration = iteration;

        let mean = |f: &dyn Fn(&GeneratorSample) -> f64| g_samples.iter().map(f).sum::<f64>() * scale;
        let d_mean = |f: &dyn Fn(&DiscriminatorSample) -> f64| {
            d_samples.as_ref().map(|s| s.iter().map(f).sum::<f64>() * scale)
        };
        Ok(StepReport {
            iteration,
            lr_g,
            lr_d,
            batch,
            loss_g: mean(&|s| s.total),
            loss_adv: mean(&|s| s.adv),
            loss_rec: mean(&|s| s.rec),
            loss_uni: mean(&|s| s.uni),
            loss_d: d_mean(&|s| s.loss),
            d_real: d_mean(&|s| s.d_real),
            d_fake: d_mean(&|s| s.d_fake),
        })
    }
}
