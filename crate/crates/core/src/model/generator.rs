use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::{array_to_points, ModelError};
use crate::geometry::{farthest_point_sampling, PointCloud, SpatialIndex};
use crate::math;
use crate::nn::{Array2, Graph, Mlp, Params, SelfAttention, Var};

/// Generator hyperparameters and ablation switches.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Input points per patch.
    pub n: usize,
    /// Upsampling rate.
    pub r: usize,
    /// Width of the extracted features.
    pub c: usize,
    /// Width of the expansion features.
    pub c_prime: usize,
    /// Half-extent of the square the grid codes are drawn from.
    pub grid_extent: f64,
    /// Neighborhood size of the grouping layer (the point itself included).
    pub k: usize,
    /// Number of dense blocks; each contributes `c / dense_blocks` channels.
    pub dense_blocks: usize,
    /// Layers per dense block.
    pub dense_layers: usize,
    /// Hidden width of the coordinate regression head.
    pub regression_hidden: usize,
    /// Self-attention inside the up-feature operator.
    pub attention: bool,
    /// Up-down-up unit; when off a single up-feature operator expands `F`.
    pub up_down_up: bool,
    /// Over-generate `(r + 2) N` points and keep `rN` by farthest sampling;
    /// when off exactly `rN` points are regressed.
    pub farthest_sampling: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 256,
            r: 4,
            c: 480,
            c_prime: 128,
            grid_extent: 0.2,
            k: 16,
            dense_blocks: 3,
            dense_layers: 2,
            regression_hidden: 64,
            attention: true,
            up_down_up: true,
            farthest_sampling: true,
        }
    }
}

impl GeneratorConfig {
    /// Number of expanded features per input point.
    pub fn expansion_rate(&self) -> usize {
        if self.farthest_sampling {
            self.r + 2
        } else {
            self.r
        }
    }

    /// Output points per patch.
    pub fn output_points(&self) -> usize {
        self.r * self.n
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 || self.r == 0 || self.c == 0 || self.c_prime == 0 || self.regression_hidden == 0 {
            return Err(ModelError::BadConfig("sizes and widths must be positive"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(ModelError::BadConfig("k must lie in 1..=n"));
        }
        if self.dense_blocks == 0 || self.dense_layers == 0 || self.c % self.dense_blocks != 0 {
            return Err(ModelError::BadConfig("c must be a positive multiple of dense_blocks"));
        }
        if self.expansion_rate() < 2 {
            return Err(ModelError::BadConfig("expansion rate must be at least 2"));
        }
        if !(self.grid_extent.is_finite() && self.grid_extent > 0.0) {
            return Err(ModelError::BadConfig("grid extent must be positive"));
        }
        Ok(())
    }
}

/// Grid codes for `rate` feature copies: the first `rate` cells, row-major,
/// of a `s x s` grid over `[-extent, extent]^2` with `s = ceil(sqrt(rate))`.
/// Code `i` is `(u, v)` with `u` along the row.
pub fn grid_codes(rate: usize, extent: f64) -> Vec<[f64; 2]> {
    let mut side = math::ceil(math::sqrt(rate as f64)) as usize;
    while side * side < rate {
        side += 1;
    }
    let coord = |i: usize| {
        if side == 1 {
            0.0
        } else {
            -extent + 2.0 * extent * i as f64 / (side - 1) as f64
        }
    };
    (0..rate).map(|i| [coord(i % side), coord(i / side)]).collect()
}

/// Row permutation that brings the `rate` copies of each original point
/// together: output row `n * rate + i` is input row `i * N + n`.
pub fn down_grouping_index(n: usize, rate: usize) -> Vec<usize> {
    (0..n).flat_map(|p| (0..rate).map(move |i| i * n + p)).collect()
}

/// kNN grouping followed by densely connected shared-MLP blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseExtractor {
    pub k: usize,
    pub blocks: Vec<Mlp>,
}

impl DenseExtractor {
    pub fn new<R: Rng + ?Sized>(params: &mut Params, name: &str, cfg: &GeneratorConfig, rng: &mut R) -> Self {
        let growth = cfg.c / cfg.dense_blocks;
        let mut width = 6;
        let blocks = (0..cfg.dense_blocks)
            .map(|b| {
                let mut widths = alloc::vec![width];
                widths.extend(core::iter::repeat_n(growth, cfg.dense_layers));
                width += growth;
                Mlp::new(params, &format!("{name}.block{b}"), &widths, true, rng)
            })
            .collect();
        Self { k: cfg.k, blocks }
    }

    pub fn out_width(&self) -> usize {
        self.blocks.iter().map(Mlp::out_width).sum()
    }

    /// Each point concatenated with the column-wise maximum of its offsets to
    /// its `k` nearest neighbors (`N x 6`).
    pub fn group(&self, g: &mut Graph, p: Var) -> Result<Var, ModelError> {
        let points = array_to_points(g.value(p));
        if points.len() < self.k {
            return Err(ModelError::TooFewPoints { points: points.len(), k: self.k });
        }
        let cloud = PointCloud::new(points)?;
        let index = SpatialIndex::build(&cloud)?;
        let mut neighbors = Vec::with_capacity(cloud.len() * self.k);
        let mut centers = Vec::with_capacity(cloud.len() * self.k);
        for (i, q) in cloud.points().iter().enumerate() {
            for nb in index.knn(q, self.k)? {
                neighbors.push(nb.index);
                centers.push(i);
            }
        }
        let nb = g.gather_rows(p, &neighbors)?;
        let ctr = g.gather_rows(p, &centers)?;
        let offsets = g.sub(nb, ctr)?;
        let pooled = g.max_pool_groups(offsets, self.k)?;
        Ok(g.concat_cols(&[p, pooled])?)
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, p: Var) -> Result<Var, ModelError> {
        let mut inputs = alloc::vec![self.group(g, p)?];
        let mut outputs = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let x = if inputs.len() == 1 { inputs[0] } else { g.concat_cols(&inputs)? };
            let y = block.forward(g, params, x)?;
            inputs.push(y);
            outputs.push(y);
        }
        Ok(g.concat_cols(&outputs)?)
    }
}

/// Duplicates features `rate` times, appends a grid code per copy, then
/// (optionally) self-attention and a shared MLP back to `C'`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpFeature {
    pub rate: usize,
    pub codes: Vec<[f64; 2]>,
    pub attention: Option<SelfAttention>,
    pub mlp: Mlp,
}

impl UpFeature {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        channels: usize,
        rate: usize,
        extent: f64,
        attention: bool,
        rng: &mut R,
    ) -> Self {
        let attention = attention.then(|| SelfAttention::new(params, &format!("{name}.att"), channels + 2, rng));
        let mlp = Mlp::new(params, &format!("{name}.mlp"), &[channels + 2, channels, channels], true, rng);
        Self { rate, codes: grid_codes(rate, extent), attention, mlp }
    }

    /// The tiled features with codes appended (`rate N x (C + 2)`).
    pub fn expand(&self, g: &mut Graph, f: Var) -> Result<Var, ModelError> {
        let n = g.value(f).rows();
        let tiled = g.tile_rows(f, self.rate)?;
        let mut codes = Array2::zeros(n * self.rate, 2);
        for (i, code) in self.codes.iter().enumerate() {
            for row in i * n..(i + 1) * n {
                codes.row_mut(row).copy_from_slice(code);
            }
        }
        let codes = g.constant(codes);
        Ok(g.concat_cols(&[tiled, codes])?)
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, f: Var) -> Result<Var, ModelError> {
        let mut x = self.expand(g, f)?;
        if let Some(att) = &self.attention {
            x = att.forward(g, params, x)?;
        }
        Ok(self.mlp.forward(g, params, x)?)
    }
}

/// Regroups `rate N` expanded rows into `N x (rate C)` and maps back to `C'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownFeature {
    pub rate: usize,
    pub mlp: Mlp,
}

impl DownFeature {
    pub fn new<R: Rng + ?Sized>(params: &mut Params, name: &str, channels: usize, rate: usize, rng: &mut R) -> Self {
        let mlp = Mlp::new(params, &format!("{name}.mlp"), &[rate * channels, channels, channels], true, rng);
        Self { rate, mlp }
    }

    /// The regrouped `N x (rate C)` features before the MLP.
    pub fn regroup(&self, g: &mut Graph, f_up: Var) -> Result<Var, ModelError> {
        let (rows, cols) = g.value(f_up).shape();
        if self.rate == 0 || rows % self.rate != 0 {
            return Err(ModelError::Indivisible { rows, rate: self.rate });
        }
        let n = rows / self.rate;
        let grouped = g.gather_rows(f_up, &down_grouping_index(n, self.rate))?;
        Ok(g.reshape(grouped, n, self.rate * cols)?)
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, f_up: Var) -> Result<Var, ModelError> {
        let x = self.regroup(g, f_up)?;
        Ok(self.mlp.forward(g, params, x)?)
    }
}

/// Up-feature, down-feature, and an up-sampled residual correction.
#[derive(Debug, Clone, PartialEq)]
pub struct UpDownUp {
    pub pre: Mlp,
    pub up: UpFeature,
    pub down: DownFeature,
    pub up_residual: UpFeature,
}

/// Intermediate values of one [`UpDownUp`] evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpDownUpTrace {
    pub f1: Var,
    pub f_up: Var,
    pub f2: Var,
    pub delta: Var,
    pub delta_up: Var,
    pub output: Var,
}

impl UpDownUp {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        channels: usize,
        rate: usize,
        extent: f64,
        attention: bool,
        rng: &mut R,
    ) -> Self {
        Self {
            pre: Mlp::new(params, &format!("{name}.pre"), &[channels, channels], true, rng),
            up: UpFeature::new(params, &format!("{name}.up"), channels, rate, extent, attention, rng),
            down: DownFeature::new(params, &format!("{name}.down"), channels, rate, rng),
            up_residual: UpFeature::new(params, &format!("{name}.up2"), channels, rate, extent, attention, rng),
        }
    }

    pub fn trace(&self, g: &mut Graph, params: &Params, f: Var) -> Result<UpDownUpTrace, ModelError> {
        let f1 = self.pre.forward(g, params, f)?;
        let f_up = self.up.forward(g, params, f1)?;
        let f2 = self.down.forward(g, params, f_up)?;
        let delta = g.sub(f2, f1)?;
        let delta_up = self.up_residual.forward(g, params, delta)?;
        let output = g.add(f_up, delta_up)?;
        Ok(UpDownUpTrace { f1, f_up, f2, delta, delta_up, output })
    }

    pub fn forward(&self, g: &mut Graph, params: &Params, f: Var) -> Result<Var, ModelError> {
        Ok(self.trace(g, params, f)?.output)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Expansion {
    UpDownUp(UpDownUp),
    Single(UpFeature),
}

/// The upsampling generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub config: GeneratorConfig,
    pub extractor: DenseExtractor,
    pub reduce: Mlp,
    expansion: Expansion,
    pub regression: Mlp,
}

/// Result of [`Generator::forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorOutput {
    /// All regressed points (`rate N x 3`).
    pub regressed: Var,
    /// Rows of `regressed` kept, in selection order.
    pub selected: Vec<usize>,
    /// The kept points (`rN x 3`).
    pub points: Var,
}

impl Generator {
    /// Builds the network, registering its parameters in `params`.
    pub fn new<R: Rng + ?Sized>(cfg: GeneratorConfig, params: &mut Params, rng: &mut R) -> Result<Self, ModelError> {
        cfg.validate()?;
        let extractor = DenseExtractor::new(params, "extract", &cfg, rng);
        let reduce = Mlp::new(params, "reduce", &[cfg.c, cfg.c_prime], true, rng);
        let rate = cfg.expansion_rate();
        let expansion = if cfg.up_down_up {
            Expansion::UpDownUp(UpDownUp::new(params, "expand", cfg.c_prime, rate, cfg.grid_extent, cfg.attention, rng))
        } else {
            Expansion::Single(UpFeature::new(params, "expand.up", cfg.c_prime, rate, cfg.grid_extent, cfg.attention, rng))
        };
        let regression = Mlp::new(params, "regress", &[cfg.c_prime, cfg.regression_hidden, 3], false, rng);
        Ok(Self { config: cfg, extractor, reduce, expansion, regression })
    }

    pub fn up_down_up(&self) -> Option<&UpDownUp> {
        match &self.expansion {
            Expansion::UpDownUp(u) => Some(u),
            Expansion::Single(_) => None,
        }
    }

    /// Extracted `N x C` features.
    pub fn features(&self, g: &mut Graph, params: &Params, p: Var) -> Result<Var, ModelError> {
        let rows = g.value(p).rows();
        if rows != self.config.n || g.value(p).cols() != 3 {
            return Err(ModelError::WrongSize { expected: self.config.n, got: rows });
        }
        self.extractor.forward(g, params, p)
    }

    /// Maps an `N x 3` patch to `rN x 3` points.
    ///
    /// The selection step is computed from values and treated as constant,
    /// so gradients reach only the selected points.
    pub fn forward(&self, g: &mut Graph, params: &Params, p: Var) -> Result<GeneratorOutput, ModelError> {
        let f = self.features(g, params, p)?;
        let f = self.reduce.forward(g, params, f)?;
        let f_up = match &self.expansion {
            Expansion::UpDownUp(u) => u.forward(g, params, f)?,
            Expansion::Single(u) => u.forward(g, params, f)?,
        };
        let regressed = self.regression.forward(g, params, f_up)?;
        let target = self.config.output_points();
        let selected = if self.config.farthest_sampling {
            farthest_point_sampling(&array_to_points(g.value(regressed)), target, 0)?
        } else {
            (0..target).collect()
        };
        let points = g.gather_rows(regressed, &selected)?;
        Ok(GeneratorOutput { regressed, selected, points })
    }

    /// Forward pass on a plain array, returning the `rN x 3` output.
    pub fn generate(&self, params: &Params, p: &Array2) -> Result<Array2, ModelError> {
        let mut g = Graph::new();
        let input = g.constant(p.clone());
        let out = self.forward(&mut g, params, input)?;
        Ok(g.value(out.points).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{check_gradients, jitter_params, random_array};
    use crate::rng::seeded;

    fn toy(n: usize) -> GeneratorConfig {
        GeneratorConfig { n, r: 2, c: 6, c_prime: 4, k: 4, regression_hidden: 4, ..GeneratorConfig::default() }
    }

    #[test]
    fn grid_codes_for_four_copies() {
        let codes = grid_codes(4, 0.2);
        assert_eq!(codes, alloc::vec![[-0.2, -0.2], [0.2, -0.2], [-0.2, 0.2], [0.2, 0.2]]);
        let six = grid_codes(6, 0.2);
        assert_eq!(six.len(), 6);
        assert_eq!(six[1], [0.0, -0.2]);
        assert_eq!(six[5], [0.2, 0.0]);
        for i in 0..6 {
            for j in 0..i {
                assert_ne!(six[i], six[j]);
            }
        }
    }

    #[test]
    fn up_feature_shapes_and_distinct_copies() {
        let mut rng = seeded(1);
        let mut params = Params::new();
        let up = UpFeature::new(&mut params, "up", 8, 6, 0.2, true, &mut rng);
        let mut g = Graph::new();
        let f = g.input(random_array(4, 8, 1.0, &mut rng));
        let expanded = up.expand(&mut g, f).unwrap();
        assert_eq!(g.value(expanded).shape(), (24, 10));
        // copies 0 and 1 of point 2 share features but differ in the code
        let (a, b) = (g.value(expanded).row(2), g.value(expanded).row(6));
        assert_eq!(a[..8], b[..8]);
        assert_ne!(a[8..], b[8..]);
        let out = up.forward(&mut g, &params, f).unwrap();
        assert_eq!(g.value(out).shape(), (24, 8));
    }

    #[test]
    fn down_feature_groups_copies() {
        let mut rng = seeded(2);
        let mut params = Params::new();
        let down = DownFeature::new(&mut params, "down", 8, 6, &mut rng);
        let mut g = Graph::new();
        // row i * N + n holds the value 100 i + n in every column
        let n = 4;
        let mut x = Array2::zeros(24, 8);
        for i in 0..6 {
            for p in 0..n {
                x.row_mut(i * n + p).iter_mut().for_each(|v| *v = (100 * i + p) as f64);
            }
        }
        let f = g.input(x);
        let grouped = down.regroup(&mut g, f).unwrap();
        assert_eq!(g.value(grouped).shape(), (4, 48));
        for p in 0..n {
            for i in 0..6 {
                assert_eq!(g.value(grouped).get(p, i * 8), (100 * i + p) as f64);
            }
        }
        let out = down.forward(&mut g, &params, f).unwrap();
        assert_eq!(g.value(out).shape(), (4, 8));
        let bad = g.input(Array2::zeros(25, 8));
        assert!(matches!(down.forward(&mut g, &params, bad), Err(ModelError::Indivisible { rows: 25, rate: 6 })));
    }

    #[test]
    fn up_down_up_shape_and_zero_correction() {
        let mut rng = seeded(3);
        let mut params = Params::new();
        let unit = UpDownUp::new(&mut params, "udu", 4, 3, 0.2, true, &mut rng);
        let mut g = Graph::new();
        let f = g.input(random_array(5, 4, 1.0, &mut rng));
        let t = unit.trace(&mut g, &params, f).unwrap();
        assert_eq!(g.value(t.output).shape(), (15, 4));

        // with the residual branch silenced the output is exactly F'_up
        let mut zeroed = params.clone();
        for l in &unit.up_residual.mlp.layers {
            zeroed.value_mut(l.weight).data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        let mut g = Graph::new();
        let f = g.input(random_array(5, 4, 1.0, &mut rng));
        let t = unit.trace(&mut g, &zeroed, f).unwrap();
        assert_eq!(g.value(t.output), g.value(t.f_up));
    }

    #[test]
    fn extractor_shape_and_equivariance() {
        let mut rng = seeded(4);
        let cfg = GeneratorConfig { n: 20, ..GeneratorConfig::default() };
        let mut params = Params::new();
        let ex = DenseExtractor::new(&mut params, "ex", &cfg, &mut rng);
        assert_eq!(ex.out_width(), 480);
        let x = random_array(20, 3, 1.0, &mut rng);
        let perm: Vec<usize> = (0..20).map(|i| (i * 7) % 20).collect();
        let mut px = Array2::zeros(20, 3);
        for (i, &p) in perm.iter().enumerate() {
            px.row_mut(i).copy_from_slice(x.row(p));
        }
        let mut g = Graph::new();
        let a = g.input(x);
        let b = g.input(px);
        let fa = ex.forward(&mut g, &params, a).unwrap();
        let fb = ex.forward(&mut g, &params, b).unwrap();
        assert_eq!(g.value(fa).shape(), (20, 480));
        for (i, &p) in perm.iter().enumerate() {
            for c in 0..480 {
                assert!((g.value(fb).get(i, c) - g.value(fa).get(p, c)).abs() < 1e-12);
            }
        }
        let small = g.input(random_array(10, 3, 1.0, &mut rng));
        assert!(matches!(ex.forward(&mut g, &params, small), Err(ModelError::TooFewPoints { points: 10, k: 16 })));
    }

    #[test]
    fn extractor_gradients() {
        let mut rng = seeded(5);
        let cfg = toy(20);
        let mut params = Params::new();
        let ex = DenseExtractor::new(&mut params, "ex", &cfg, &mut rng);
        let x = random_array(20, 3, 1.0, &mut rng);
        jitter_params(&mut params, 0.1, &mut rng);
        let report = check_gradients(&[x], &params, 1e-4, None, |g, p, v| {
            let f = ex.forward(g, p, v[0]).map_err(|e| match e {
                ModelError::Nn(e) => e,
                other => panic!("{other}"),
            })?;
            let sq = g.square(f);
            Ok(g.sum_all(sq))
        })
        .unwrap();
        assert!(report.passes(1e-3), "{report:?}");
    }

    fn nn_err(e: ModelError) -> crate::nn::NnError {
        match e {
            ModelError::Nn(e) => e,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn up_down_gradients() {
        for seed in 0..5 {
            let mut rng = seeded(10 + seed);
            let mut params = Params::new();
            let up = UpFeature::new(&mut params, "up", 4, 2, 0.2, true, &mut rng);
            let down = DownFeature::new(&mut params, "down", 4, 2, &mut rng);
            let x = random_array(3, 4, 1.0, &mut rng);
            jitter_params(&mut params, 0.1, &mut rng);
            let report = check_gradients(&[x], &params, 1e-4, None, |g, p, v| {
                let u = up.forward(g, p, v[0]).map_err(nn_err)?;
                let d = down.forward(g, p, u).map_err(nn_err)?;
                let s = g.square(d);
                let a = g.sum_all(s);
                let s2 = g.square(u);
                let b = g.sum_all(s2);
                g.add(a, b)
            })
            .unwrap();
            assert!(report.passes(1e-3), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn up_down_up_gradients() {
        let mut rng = seeded(20);
        let mut params = Params::new();
        let unit = UpDownUp::new(&mut params, "udu", 4, 3, 0.2, true, &mut rng);
        let x = random_array(3, 4, 1.0, &mut rng);
        jitter_params(&mut params, 0.1, &mut rng);
        let report = check_gradients(&[x], &params, 1e-4, None, |g, p, v| {
            let out = unit.forward(g, p, v[0]).map_err(nn_err)?;
            let s = g.square(out);
            Ok(g.sum_all(s))
        })
        .unwrap();
        assert!(report.passes(1e-3), "{report:?}");
    }

    #[test]
    fn generator_selects_from_regressed() {
        let mut rng = seeded(6);
        let cfg = GeneratorConfig { n: 16, ..GeneratorConfig::default() };
        let mut params = Params::new();
        let gen = Generator::new(cfg, &mut params, &mut rng).unwrap();
        let mut g = Graph::new();
        let p = g.constant(random_array(16, 3, 0.5, &mut rng));
        let out = gen.forward(&mut g, &params, p).unwrap();
        assert_eq!(g.value(out.regressed).shape(), (96, 3));
        assert_eq!(g.value(out.points).shape(), (64, 3));
        let mut sel = out.selected.clone();
        sel.sort_unstable();
        sel.dedup();
        assert_eq!(sel.len(), 64);
        for (row, &i) in out.selected.iter().enumerate() {
            assert_eq!(g.value(out.points).row(row), g.value(out.regressed).row(i));
        }
        let wrong = g.constant(random_array(15, 3, 0.5, &mut rng));
        assert!(matches!(gen.forward(&mut g, &params, wrong), Err(ModelError::WrongSize { expected: 16, got: 15 })));
    }

    #[test]
    fn unselected_points_get_no_gradient() {
        let mut rng = seeded(7);
        let cfg = GeneratorConfig { n: 8, k: 4, c: 12, c_prime: 8, ..GeneratorConfig::default() };
        let mut params = Params::new();
        let gen = Generator::new(cfg, &mut params, &mut rng).unwrap();
        let mut g = Graph::new();
        let p = g.constant(random_array(8, 3, 0.5, &mut rng));
        let out = gen.forward(&mut g, &params, p).unwrap();
        let s = g.square(out.points);
        let loss = g.sum_all(s);
        g.backward(loss).unwrap();
        let grad = g.grad(out.regressed).unwrap();
        for r in 0..grad.rows() {
            let zero = grad.row(r).iter().all(|&v| v == 0.0);
            assert_eq!(zero, !out.selected.contains(&r), "row {r}");
        }
    }

    #[test]
    fn ablations_change_only_their_block() {
        let count = |cfg: GeneratorConfig| {
            let mut params = Params::new();
            Generator::new(cfg, &mut params, &mut seeded(0)).unwrap();
            params
        };
        let full = count(GeneratorConfig::default());
        let no_att = count(GeneratorConfig { attention: false, ..GeneratorConfig::default() });
        for prefix in ["extract", "reduce", "regress", "expand.pre", "expand.down"] {
            assert_eq!(full.scalar_count_with_prefix(prefix), no_att.scalar_count_with_prefix(prefix), "{prefix}");
        }
        let att_scalars = full.scalar_count() - no_att.scalar_count();
        let per_unit = 2 * (130 * 32 + 32) + 130 * 130 + 130;
        assert_eq!(att_scalars, 2 * per_unit);
        let no_fps = count(GeneratorConfig { farthest_sampling: false, ..GeneratorConfig::default() });
        for prefix in ["extract", "reduce", "regress", "expand.pre", "expand.up.", "expand.up2"] {
            assert_eq!(full.scalar_count_with_prefix(prefix), no_fps.scalar_count_with_prefix(prefix), "{prefix}");
        }
    }
}
