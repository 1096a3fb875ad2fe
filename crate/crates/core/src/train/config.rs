use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use super::TrainError;
use crate::losses::{LossWeights, UniformLossConfig};
use crate::math;
use crate::metrics::UNIFORMITY_PERCENTAGES;
use crate::model::{DiscriminatorConfig, GeneratorConfig};
use crate::nn::AdamConfig;

/// A component that can be removed for an ablation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ablation {
    Discriminator,
    UniformLoss,
    Attention,
    UpDownUp,
    FarthestSampling,
    /// Uniform loss, attention, up-down-up and farthest sampling together.
    Baseline,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::Discriminator,
        Ablation::UniformLoss,
        Ablation::Attention,
        Ablation::UpDownUp,
        Ablation::FarthestSampling,
        Ablation::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Discriminator => "discriminator",
            Ablation::UniformLoss => "uniform-loss",
            Ablation::Attention => "attention",
            Ablation::UpDownUp => "up-down-up",
            Ablation::FarthestSampling => "farthest-sampling",
            Ablation::Baseline => "baseline",
        }
    }
}

impl FromStr for Ablation {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| TrainError::Config(format!("unknown ablation '{s}'")))
    }
}

/// Which components are switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Ablations {
    pub discriminator: bool,
    pub uniform_loss: bool,
    pub attention: bool,
    pub up_down_up: bool,
    pub farthest_sampling: bool,
}

impl Ablations {
    pub fn apply(&mut self, a: Ablation) {
        match a {
            Ablation::Discriminator => self.discriminator = true,
            Ablation::UniformLoss => self.uniform_loss = true,
            Ablation::Attention => self.attention = true,
            Ablation::UpDownUp => self.up_down_up = true,
            Ablation::FarthestSampling => self.farthest_sampling = true,
            Ablation::Baseline => {
                self.uniform_loss = true;
                self.attention = true;
                self.up_down_up = true;
                self.farthest_sampling = true;
            }
        }
    }

    pub fn from_list(list: &[Ablation]) -> Self {
        let mut out = Self::default();
        for &a in list {
            out.apply(a);
        }
        out
    }

    /// Comma-separated names of the removed components (`none` if empty).
    pub fn to_list_string(&self) -> String {
        let names: Vec<&str> = [
            (self.discriminator, Ablation::Discriminator),
            (self.uniform_loss, Ablation::UniformLoss),
            (self.attention, Ablation::Attention),
            (self.up_down_up, Ablation::UpDownUp),
            (self.farthest_sampling, Ablation::FarthestSampling),
        ]
        .into_iter()
        .filter(|(on, _)| *on)
        .map(|(_, a)| a.name())
        .collect();
        if names.is_empty() {
            String::from("none")
        } else {
            names.join(",")
        }
    }

    fn parse_list(s: &str) -> Result<Self, TrainError> {
        let mut out = Self::default();
        if s.trim() == "none" || s.trim().is_empty() {
            return Ok(out);
        }
        for part in s.split(',') {
            out.apply(part.trim().parse()?);
        }
        Ok(out)
    }
}

/// Every setting of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Input points per patch.
    pub n: usize,
    /// Upsampling rate.
    pub r: usize,
    /// Seeds per percentage in the uniform loss.
    pub uniform_seeds: usize,
    pub batch: usize,
    pub epochs: usize,
    /// Overrides the iteration count derived from `epochs` when non-zero.
    pub iterations: u64,
    pub lr_g: f64,
    pub lr_d: f64,
    /// Learning rates are multiplied by `lr_decay` every `lr_decay_steps`.
    pub lr_decay: f64,
    pub lr_decay_steps: u64,
    pub lr_floor: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub weight_gan: f64,
    pub weight_rec: f64,
    pub weight_uni: f64,
    /// Auction accuracy of the reconstruction matching.
    pub emd_eps: f64,
    pub patches_per_mesh: usize,
    /// Fraction of the surface a training patch covers.
    pub patch_fraction: f64,
    /// Meshes with fewer successful patches are rejected.
    pub min_patches_per_mesh: usize,
    pub augment_rotate: bool,
    pub augment_scale: bool,
    pub augment_jitter: bool,
    pub scale_min: f64,
    pub scale_max: f64,
    pub jitter_sigma: f64,
    /// Jitter vectors are clipped to this multiple of `jitter_sigma` in length.
    pub jitter_clip: f64,
    /// Discriminator updates per generator update.
    pub d_steps: usize,
    /// Write a checkpoint every this many iterations (0: only at the end).
    pub checkpoint_every: u64,
    pub ablations: Ablations,
    pub seed: u64,
    // network widths
    pub c: usize,
    pub c_prime: usize,
    pub grid_extent: f64,
    pub k: usize,
    pub regression_hidden: usize,
    pub c_d: usize,
    pub c_d_prime: usize,
    pub d_head_hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n: 256,
            r: 4,
            uniform_seeds: 50,
            batch: 28,
            epochs: 100,
            iterations: 0,
            lr_g: 1e-3,
            lr_d: 1e-4,
            lr_decay: 0.7,
            lr_decay_steps: 50_000,
            lr_floor: 1e-6,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            weight_gan: 0.5,
            weight_rec: 100.0,
            weight_uni: 10.0,
            emd_eps: 1e-3,
            patches_per_mesh: 200,
            patch_fraction: 0.05,
            min_patches_per_mesh: 10,
            augment_rotate: true,
            augment_scale: true,
            augment_jitter: true,
            scale_min: 0.8,
            scale_max: 1.2,
            jitter_sigma: 0.01,
            jitter_clip: 3.0,
            d_steps: 1,
            checkpoint_every: 0,
            ablations: Ablations::default(),
            seed: 0,
            c: 480,
            c_prime: 128,
            grid_extent: 0.2,
            k: 16,
            regression_hidden: 64,
            c_d: 64,
            c_d_prime: 256,
            d_head_hidden: 64,
        }
    }
}

impl TrainConfig {
    /// A CPU-sized profile: 64-point inputs, 10 patches per mesh, batch 4,
    /// 500 iterations.
    pub fn desk() -> Self {
        Self { n: 64, batch: 4, iterations: 500, patches_per_mesh: 10, checkpoint_every: 250, ..Self::default() }
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            n: self.n,
            r: self.r,
            c: self.c,
            c_prime: self.c_prime,
            grid_extent: self.grid_extent,
            k: self.k,
            regression_hidden: self.regression_hidden,
            attention: !self.ablations.attention,
            up_down_up: !self.ablations.up_down_up,
            farthest_sampling: !self.ablations.farthest_sampling,
            ..GeneratorConfig::default()
        }
    }

    pub fn discriminator_config(&self) -> DiscriminatorConfig {
        DiscriminatorConfig {
            c_d: self.c_d,
            c_d_prime: self.c_d_prime,
            head: alloc::vec![self.c_d_prime, self.d_head_hidden, 1],
            attention: !self.ablations.attention,
        }
    }

    /// Loss weights with ablated terms set to zero.
    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            gan: if self.ablations.discriminator { 0.0 } else { self.weight_gan },
            rec: self.weight_rec,
            uni: if self.ablations.uniform_loss { 0.0 } else { self.weight_uni },
        }
    }

    pub fn uniform_config(&self) -> UniformLossConfig {
        UniformLossConfig { percentages: UNIFORMITY_PERCENTAGES.to_vec(), seeds: self.uniform_seeds }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { beta1: self.adam_beta1, beta2: self.adam_beta2, eps: self.adam_eps }
    }

    /// Target points per patch.
    pub fn target_points(&self) -> usize {
        self.n * self.r
    }

    /// Total iterations for a dataset of `patches` pairs.
    pub fn total_iterations(&self, patches: usize) -> u64 {
        if self.iterations > 0 {
            self.iterations
        } else {
            let per_epoch = patches.div_ceil(self.batch.max(1)) as u64;
            per_epoch * self.epochs as u64
        }
    }

    /// Learning rate at 1-based `iteration`:
    /// `max(floor, initial * decay^((iteration - 1) / decay_steps))`.
    pub fn learning_rate(&self, initial: f64, iteration: u64) -> f64 {
        let t = iteration.saturating_sub(1) as f64 / self.lr_decay_steps as f64;
        (initial * math::powf(self.lr_decay, t)).max(self.lr_floor)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let positive = [self.lr_g, self.lr_d, self.lr_decay, self.lr_floor, self.scale_min, self.scale_max, self.emd_eps];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(TrainError::Config("rates, scales and epsilon must be positive".into()));
        }
        if self.lr_floor >= self.lr_g.min(self.lr_d) {
            return Err(TrainError::Config("learning-rate floor must lie below both initial rates".into()));
        }
        if self.n == 0 || self.r == 0 || self.batch == 0 || self.uniform_seeds == 0 || self.lr_decay_steps == 0 {
            return Err(TrainError::Config("counts must be positive".into()));
        }
        if self.scale_min > self.scale_max {
            return Err(TrainError::Config("scale_min exceeds scale_max".into()));
        }
        if !(self.patch_fraction > 0.0 && self.patch_fraction < 0.5) {
            return Err(TrainError::Config("patch_fraction must lie in (0, 0.5)".into()));
        }
        if [self.weight_gan, self.weight_rec, self.weight_uni, self.jitter_sigma, self.jitter_clip]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(TrainError::Config("weights and jitter must be non-negative".into()));
        }
        self.generator_config().validate().map_err(|e| TrainError::Config(e.to_string()))?;
        self.discriminator_config().validate().map_err(|e| TrainError::Config(e.to_string()))?;
        Ok(())
    }

    /// `key = value` lines covering every field, in a fixed order.
    pub fn to_key_values(&self) -> String {
        let b = |v: bool| if v { "true" } else { "false" };
        let lines: [(&str, String); 46] = [
            ("n", self.n.to_string()),
            ("r", self.r.to_string()),
            ("uniform_seeds", self.uniform_seeds.to_string()),
            ("batch", self.batch.to_string()),
            ("epochs", self.epochs.to_string()),
            ("iterations", self.iterations.to_string()),
            ("lr_g", format!("{:?}", self.lr_g)),
            ("lr_d", format!("{:?}", self.lr_d)),
            ("lr_decay", format!("{:?}", self.lr_decay)),
            ("lr_decay_steps", self.lr_decay_steps.to_string()),
            ("lr_floor", format!("{:?}", self.lr_floor)),
            ("adam_beta1", format!("{:?}", self.adam_beta1)),
            ("adam_beta2", format!("{:?}", self.adam_beta2)),
            ("adam_eps", format!("{:?}", self.adam_eps)),
            ("weight_gan", format!("{:?}", self.weight_gan)),
            ("weight_rec", format!("{:?}", self.weight_rec)),
            ("weight_uni", format!("{:?}", self.weight_uni)),
            ("emd_eps", format!("{:?}", self.emd_eps)),
            ("patches_per_mesh", self.patches_per_mesh.to_string()),
            ("patch_fraction", format!("{:?}", self.patch_fraction)),
            ("min_patches_per_mesh", self.min_patches_per_mesh.to_string()),
            ("augment_rotate", b(self.augment_rotate).into()),
            ("augment_scale", b(self.augment_scale).into()),
            ("augment_jitter", b(self.augment_jitter).into()),
            ("scale_min", format!("{:?}", self.scale_min)),
            ("scale_max", format!("{:?}", self.scale_max)),
            ("jitter_sigma", format!("{:?}", self.jitter_sigma)),
            ("jitter_clip", format!("{:?}", self.jitter_clip)),
            ("d_steps", self.d_steps.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("ablate", self.ablations.to_list_string()),
            ("seed", self.seed.to_string()),
            ("c", self.c.to_string()),
            ("c_prime", self.c_prime.to_string()),
            ("grid_extent", format!("{:?}", self.grid_extent)),
            ("k", self.k.to_string()),
            ("regression_hidden", self.regression_hidden.to_string()),
            ("c_d", self.c_d.to_string()),
            ("c_d_prime", self.c_d_prime.to_string()),
            ("d_head_hidden", self.d_head_hidden.to_string()),
            // derived values, written for reference and ignored on read
            ("derived.target_points", self.target_points().to_string()),
            ("derived.expansion_rate", self.generator_config().expansion_rate().to_string()),
            ("derived.loss_weight_gan", format!("{:?}", self.loss_weights().gan)),
            ("derived.loss_weight_uni", format!("{:?}", self.loss_weights().uni)),
            ("derived.adam", format!("{:?}", self.adam())),
            ("derived.uniform_percentages", format!("{:?}", UNIFORMITY_PERCENTAGES)),
        ];
        let mut out = String::new();
        for (k, v) in lines {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Parses `key = value` lines over the defaults. Blank lines and lines
    /// starting with `#` are ignored; unknown keys are errors.
    pub fn from_key_values(text: &str) -> Result<Self, TrainError> {
        Self::from_key_values_over(Self::default(), text)
    }

    /// Parses `key = value` lines over `base`.
    pub fn from_key_values_over(base: Self, text: &str) -> Result<Self, TrainError> {
        let mut cfg = base;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| TrainError::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                TrainError::Config(msg) => TrainError::Config(format!("line {}: {msg}", lineno + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), TrainError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, TrainError> {
            value.parse().map_err(|_| TrainError::Config(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "n" => self.n = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "uniform_seeds" => self.uniform_seeds = num(key, value)?,
            "batch" => self.batch = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "iterations" => self.iterations = num(key, value)?,
            "lr_g" => self.lr_g = num(key, value)?,
            "lr_d" => self.lr_d = num(key, value)?,
            "lr_decay" => self.lr_decay = num(key, value)?,
            "lr_decay_steps" => self.lr_decay_steps = num(key, value)?,
            "lr_floor" => self.lr_floor = num(key, value)?,
            "adam_beta1" => self.adam_beta1 = num(key, value)?,
            "adam_beta2" => self.adam_beta2 = num(key, value)?,
            "adam_eps" => self.adam_eps = num(key, value)?,
            "weight_gan" => self.weight_gan = num(key, value)?,
            "weight_rec" => self.weight_rec = num(key, value)?,
            "weight_uni" => self.weight_uni = num(key, value)?,
            "emd_eps" => self.emd_eps = num(key, value)?,
            "patches_per_mesh" => self.patches_per_mesh = num(key, value)?,
            "patch_fraction" => self.patch_fraction = num(key, value)?,
            "min_patches_per_mesh" => self.min_patches_per_mesh = num(key, value)?,
            "augment_rotate" => self.augment_rotate = num(key, value)?,
            "augment_scale" => self.augment_scale = num(key, value)?,
            "augment_jitter" => self.augment_jitter = num(key, value)?,
            "scale_min" => self.scale_min = num(key, value)?,
            "scale_max" => self.scale_max = num(key, value)?,
            "jitter_sigma" => self.jitter_sigma = num(key, value)?,
            "jitter_clip" => self.jitter_clip = num(key, value)?,
            "d_steps" => self.d_steps = num(key, value)?,
            "checkpoint_every" => self.checkpoint_every = num(key, value)?,
            "ablate" => self.ablations = Ablations::parse_list(value)?,
            "seed" => self.seed = num(key, value)?,
            "c" => self.c = num(key, value)?,
            "c_prime" => self.c_prime = num(key, value)?,
            "grid_extent" => self.grid_extent = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "regression_hidden" => self.regression_hidden = num(key, value)?,
            "c_d" => self.c_d = num(key, value)?,
            "c_d_prime" => self.c_d_prime = num(key, value)?,
            "d_head_hidden" => self.d_head_hidden = num(key, value)?,
            k if k.starts_with("derived.") => {}
            other => return Err(TrainError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}
