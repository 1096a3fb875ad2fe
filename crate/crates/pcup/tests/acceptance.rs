//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use pcup::cli::main_with;
use pcup::io::format_off;
use pcup::trainer::RayonMap;
use pcup_core::geometry::{Point3, PointCloud, SpatialIndex};
use pcup_core::losses::{
    adv_loss_d, adv_loss_g, reconstruction_loss_matched, uniform_loss_with_subsets, uniform_subsets, UniformLossConfig,
};
use pcup_core::mesh::{
    area_weighted_sample, closest_point_on_triangle, poisson_disk_sample, positions, shapes, TriangleMesh,
};
use pcup_core::metrics::{
    emd_approx, emd_exact, expected_count, expected_spacing, uniformity_report_mesh, UNIFORMITY_PERCENTAGES,
};
use pcup_core::model::{
    array_to_points, points_to_array, DenseExtractor, Discriminator, DiscriminatorConfig, DownFeature,
    GeneratorConfig, ModelError, UpDownUp, UpFeature,
};
use pcup_core::nn::gradcheck::{check_gradients, jitter_params, random_array, GradCheckReport};
use pcup_core::nn::{Array2, Graph, NnError, Params, SelfAttention, Var};
use pcup_core::patterns::PATTERN_POINTS;
use pcup_core::rng::seeded;
use pcup_core::train::{
    build_mesh_patches, generator_pass, upsample_cloud, Ablation, Gan, GeneratorUpsampler, TrainConfig, Trainer,
};
use rand::seq::SliceRandom;
use rand::Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_cloud<R: Rng>(n: usize, rng: &mut R) -> PointCloud {
    PointCloud::new((0..n).map(|_| Point3::new(rng.random(), rng.random(), rng.random())).collect()).unwrap()
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

fn emd_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(1);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let (a, b) = (random_cloud(n, &mut rng), random_cloud(n, &mut rng));
        let exact = emd_exact(&a, &b).unwrap();
        if exact.cost != brute_force_emd(&a, &b) {
            mismatches += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let n = if i < 5 { 512 } else { rng.random_range(8..=512) };
        let (a, b) = (random_cloud(n, &mut rng), random_cloud(n, &mut rng));
        let exact = emd_exact(&a, &b).unwrap().cost;
        let approx = emd_approx(&a, &b, 1e-3).unwrap().cost;
        worst = worst.max((approx - exact) / exact);
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && worst < 0.005 && within(elapsed, 60),
        format!("{mismatches} brute-force mismatches, worst approx excess {:.4}%, {elapsed:.1?}", 100.0 * worst),
    )
}

/// Minimum over all permutations, summing in the same order as the solver.
fn brute_force_emd(a: &PointCloud, b: &PointCloud) -> f64 {
    fn go(a: &[Point3], b: &[Point3], perm: &mut Vec<usize>, used: &mut [bool], best: &mut f64) {
        if perm.len() == a.len() {
            let cost: f64 = a.iter().zip(perm.iter()).map(|(p, &j)| p.distance(&b[j])).sum();
            *best = best.min(cost);
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                perm.push(j);
                go(a, b, perm, used, best);
                perm.pop();
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a.points(), b.points(), &mut Vec::new(), &mut vec![false; b.len()], &mut best);
    best
}

fn nn(e: ModelError) -> NnError {
    match e {
        ModelError::Nn(e) => e,
        other => panic!("{other}"),
    }
}

/// Fixed non-symmetric weighting so every upstream gradient entry differs.
fn weighted_sum(g: &mut Graph, x: Var) -> Result<Var, NnError> {
    let (r, c) = g.value(x).shape();
    let w = Array2::from_vec(r, c, (0..r * c).map(|i| 0.3 + 0.17 * i as f64 - 0.01 * (i * i) as f64).collect())?;
    let w = g.constant(w);
    let p = g.mul(x, w)?;
    Ok(g.sum_all(p))
}

struct GradSuite {
    reports: Vec<(String, GradCheckReport)>,
}

impl GradSuite {
    fn run<F>(&mut self, name: &str, inputs: &[Array2], params: &Params, f: F)
    where
        F: Fn(&mut Graph, &Params, &[Var]) -> Result<Var, NnError>,
    {
        let report = check_gradients(inputs, params, 1e-4, None, f).unwrap();
        self.reports.push((name.to_string(), report));
    }

    fn op<F>(&mut self, name: &str, inputs: &[Array2], f: F)
    where
        F: Fn(&mut Graph, &[Var]) -> Result<Var, NnError>,
    {
        self.run(name, inputs, &Params::new(), |g, _, v| {
            let y = f(g, v)?;
            weighted_sum(g, y)
        });
    }
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(2);
    let mut s = GradSuite { reports: Vec::new() };
    let m = |r, c, rng: &mut _| random_array(r, c, 1.0, rng);
    let (x, y) = (m(4, 3, &mut rng), m(4, 3, &mut rng));

    s.op("linear", &[x.clone(), m(3, 2, &mut rng), m(1, 2, &mut rng)], |g, v| g.linear(v[0], v[1], v[2]));
    s.op("relu", &[x.clone()], |g, v| Ok(g.relu(v[0])));
    s.op("sigmoid", &[x.clone()], |g, v| Ok(g.sigmoid(v[0])));
    s.op("softmax_rows", &[x.clone()], |g, v| Ok(g.softmax_rows(v[0])));
    s.op("softmax_cols", &[x.clone()], |g, v| Ok(g.softmax_cols(v[0])));
    s.op("matmul", &[m(3, 4, &mut rng), m(4, 2, &mut rng)], |g, v| g.matmul(v[0], v[1]));
    s.op("transpose", &[x.clone()], |g, v| Ok(g.transpose(v[0])));
    s.op("concat_cols", &[m(3, 2, &mut rng), m(3, 4, &mut rng)], |g, v| g.concat_cols(&[v[0], v[1]]));
    s.op("reshape", &[x.clone()], |g, v| g.reshape(v[0], 2, 6));
    s.op("tile_rows", &[x.clone()], |g, v| g.tile_rows(v[0], 3));
    s.op("max_pool_groups", &[m(6, 3, &mut rng)], |g, v| g.max_pool_groups(v[0], 2));
    s.op("max_over_rows", &[x.clone()], |g, v| g.max_over_rows(v[0]));
    s.op("add", &[x.clone(), y.clone()], |g, v| g.add(v[0], v[1]));
    s.op("sub", &[x.clone(), y.clone()], |g, v| g.sub(v[0], v[1]));
    s.op("mul", &[x.clone(), y.clone()], |g, v| g.mul(v[0], v[1]));
    s.op("scale", &[x.clone()], |g, v| Ok(g.scale(v[0], -1.7)));
    s.op("add_scalar", &[x.clone()], |g, v| Ok(g.add_scalar(v[0], 0.4)));
    s.op("square", &[x.clone()], |g, v| Ok(g.square(v[0])));
    s.op("sum_all", &[x.clone()], |g, v| Ok(g.sum_all(v[0])));
    s.op("mean_all", &[x.clone()], |g, v| Ok(g.mean_all(v[0])));
    s.op("gather_rows", &[m(5, 3, &mut rng)], |g, v| g.gather_rows(v[0], &[4, 0, 0, 2]));
    s.op("row_norms", &[x.clone()], |g, v| Ok(g.row_norms(v[0])));

    let squared_sum = |g: &mut Graph, y: Var| {
        let sq = g.square(y);
        g.sum_all(sq)
    };

    let mut params = Params::new();
    let att = SelfAttention::new(&mut params, "att", 8, &mut rng);
    jitter_params(&mut params, 0.1, &mut rng);
    s.run("self-attention", &[m(5, 8, &mut rng)], &params, |g, p, v| {
        let out = att.forward(g, p, v[0])?;
        Ok(squared_sum(g, out))
    });

    let mut params = Params::new();
    let up = UpFeature::new(&mut params, "up", 4, 2, 0.2, true, &mut rng);
    let down = DownFeature::new(&mut params, "down", 4, 2, &mut rng);
    jitter_params(&mut params, 0.1, &mut rng);
    let f = m(3, 4, &mut rng);
    s.run("up-feature", std::slice::from_ref(&f), &params, |g, p, v| {
        let u = up.forward(g, p, v[0]).map_err(nn)?;
        Ok(squared_sum(g, u))
    });
    s.run("down-feature", &[m(6, 4, &mut rng)], &params, |g, p, v| {
        let d = down.forward(g, p, v[0]).map_err(nn)?;
        Ok(squared_sum(g, d))
    });

    let mut params = Params::new();
    let unit = UpDownUp::new(&mut params, "udu", 4, 3, 0.2, true, &mut rng);
    jitter_params(&mut params, 0.1, &mut rng);
    s.run("up-down-up", &[f], &params, |g, p, v| {
        let out = unit.forward(g, p, v[0]).map_err(nn)?;
        Ok(squared_sum(g, out))
    });

    let cfg = GeneratorConfig { n: 20, r: 2, c: 6, c_prime: 4, k: 4, regression_hidden: 4, ..GeneratorConfig::default() };
    let mut params = Params::new();
    let ex = DenseExtractor::new(&mut params, "ex", &cfg, &mut rng);
    jitter_params(&mut params, 0.1, &mut rng);
    s.run("dense-extractor", &[m(20, 3, &mut rng)], &params, |g, p, v| {
        let out = ex.forward(g, p, v[0]).map_err(nn)?;
        Ok(squared_sum(g, out))
    });

    let mut params = Params::new();
    let dcfg = DiscriminatorConfig { c_d: 4, c_d_prime: 8, head: vec![8, 4, 1], attention: true };
    let d = Discriminator::new(dcfg, &mut params, &mut rng).unwrap();
    jitter_params(&mut params, 0.1, &mut rng);
    s.run("discriminator", &[m(6, 3, &mut rng)], &params, |g, p, v| d.forward(g, p, v[0]).map_err(nn));

    s.run("adversarial loss (G)", &[m(1, 1, &mut rng)], &Params::new(), |g, _, v| {
        let score = g.sigmoid(v[0]);
        Ok(adv_loss_g(g, score))
    });
    s.run("adversarial loss (D)", &[m(1, 1, &mut rng), m(1, 1, &mut rng)], &Params::new(), |g, _, v| {
        let (fake, real) = (g.sigmoid(v[0]), g.sigmoid(v[1]));
        adv_loss_d(g, fake, real)
    });

    let q = m(8, 3, &mut rng);
    let target = random_cloud(8, &mut rng);
    let matching = emd_exact(&PointCloud::new(array_to_points(&q)).unwrap(), &target).unwrap();
    s.run("reconstruction loss", &[q], &Params::new(), |g, _, v| {
        reconstruction_loss_matched(g, v[0], &target, &matching).map_err(|e| panic!("{e}"))
    });

    let mut disk = Vec::new();
    while disk.len() < 200 {
        let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if a * a + b * b <= 1.0 {
            disk.push(Point3::new(a, b, 0.05 * rng.random::<f64>()));
        }
    }
    let cloud = PointCloud::new(disk).unwrap();
    let ucfg = UniformLossConfig { percentages: vec![0.04, 0.06], seeds: 6 };
    let subsets = uniform_subsets(&cloud, &ucfg).unwrap();
    s.run("uniform loss", &[points_to_array(cloud.points())], &Params::new(), |g, _, v| {
        uniform_loss_with_subsets(g, v[0], &subsets).map_err(|e| panic!("{e}"))
    });

    let elapsed = start.elapsed();
    let failed: Vec<&str> = s.reports.iter().filter(|(_, r)| !r.passes(1e-3)).map(|(n, _)| n.as_str()).collect();
    let (worst_name, worst) = s
        .reports
        .iter()
        .map(|(n, r)| (n.as_str(), r.max_rel_error))
        .fold(("", 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    check(
        failed.is_empty() && within(elapsed, 300),
        format!(
            "{} checks, worst relative error {worst:.2e} ({worst_name}), failing: {failed:?}, {elapsed:.1?}",
            s.reports.len()
        ),
    )
}

fn uniform_discrimination() -> Outcome {
    let [clustered, random, hexagonal] = pcup::demo::patterns(0).unwrap();
    assert!([&clustered, &random, &hexagonal].iter().all(|p| p.points.len() == PATTERN_POINTS));
    let ordered = hexagonal.loss < random.loss && random.loss < clustered.loss;
    let margin = hexagonal.loss < 0.5 * random.loss;
    let d_hat = expected_spacing(0.1, 10);
    let derived = (2.0 * std::f64::consts::PI * 0.01 / (10.0 * 3f64.sqrt())).sqrt();
    let n_hat = expected_count(1024, 0.01);
    let values = (d_hat - derived).abs() < 1e-9 && (d_hat - 0.06023).abs() < 5e-6 && (n_hat - 10.24).abs() < 1e-9;
    check(
        ordered && margin && values,
        format!(
            "hexagonal {:.4e} < random {:.4e} < clustered {:.4e}; d_hat {d_hat:.10}, n_hat {n_hat}",
            hexagonal.loss, random.loss, clustered.loss
        ),
    )
}

fn spatial_queries() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(4);
    let cloud = random_cloud(2000, &mut rng);
    let index = SpatialIndex::build(&cloud).unwrap();
    let mesh = shapes::icosphere(2);
    let mut mismatches = BTreeMap::new();
    let mut miss = |kind: &'static str| *mismatches.entry(kind).or_insert(0) += 1;
    for i in 0..1000 {
        let q = Point3::new(rng.random_range(-0.2..1.2), rng.random_range(-0.2..1.2), rng.random_range(-0.2..1.2));
        match i % 3 {
            0 => {
                let k = rng.random_range(1..=20);
                let mut brute: Vec<(f64, usize)> =
                    cloud.points().iter().enumerate().map(|(j, p)| (p.distance(&q), j)).collect();
                brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let got = index.knn(&q, k).unwrap();
                let same = got.len() == k
                    && got.iter().zip(&brute).all(|(n, &(d, j))| n.index == j && (n.distance - d).abs() < 1e-12);
                if !same {
                    miss("knn");
                }
            }
            1 => {
                let r = rng.random_range(0.05..0.3);
                let brute: Vec<usize> = (0..cloud.len()).filter(|&j| cloud[j].distance(&q) <= r).collect();
                let mut got = index.ball_query(&q, r).unwrap();
                got.sort_unstable();
                if got != brute {
                    miss("ball");
                }
            }
            _ => {
                let p = q * 2.0 - Point3::new(1.0, 1.0, 1.0);
                let brute = (0..mesh.triangles().len())
                    .map(|t| {
                        let [a, b, c] = mesh.triangle_vertices(t);
                        closest_point_on_triangle(&p, &a, &b, &c).distance(&p)
                    })
                    .fold(f64::INFINITY, f64::min);
                if mesh.point_to_surface_distance(&p) != brute {
                    miss("p2f");
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(mismatches.is_empty() && within(elapsed, 30), format!("mismatches {mismatches:?}, {elapsed:.1?}"))
}

fn architecture() -> Outcome {
    let cfg = TrainConfig::default();
    let gan = Gan::new(&cfg).unwrap();
    let gen = &gan.generator;
    let n = cfg.n;
    let mut rng = seeded(5);
    let input = points_to_array(random_cloud(n, &mut rng).points());
    let mut g = Graph::new();
    let p = g.constant(input);
    let out = gen.forward(&mut g, &gan.g_params, p).unwrap();
    let regressed = g.value(out.regressed).clone();
    let points = g.value(out.points).clone();
    let mut distinct = out.selected.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let selection = regressed.rows() == (cfg.r + 2) * n
        && points.rows() == cfg.r * n
        && distinct.len() == cfg.r * n
        && distinct.iter().all(|&i| i < regressed.rows())
        && out.selected.iter().enumerate().all(|(row, &i)| points.row(row) == regressed.row(i));

    let d = gan.discriminator.as_ref().unwrap();
    let q = random_cloud(cfg.r * n, &mut rng);
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.shuffle(&mut rng);
    let a = d.discriminate(&gan.d_params, &points_to_array(q.points())).unwrap();
    let b = d.discriminate(&gan.d_params, &points_to_array(q.select(&order).points())).unwrap();

    let widths = [gen.extractor.out_width(), gen.reduce.out_width(), d.local.out_width(), d.lift.out_width()];
    check(
        selection && (a - b).abs() <= 1e-9 && widths == [480, 128, 64, 256],
        format!(
            "{} regressed -> {} selected, permutation difference {:.1e}, widths {widths:?}",
            regressed.rows(),
            points.rows(),
            (a - b).abs()
        ),
    )
}

fn overfit() -> Outcome {
    let start = Instant::now();
    let mut cfg = TrainConfig::desk();
    cfg.ablations.apply(Ablation::Discriminator);
    cfg.ablations.apply(Ablation::UniformLoss);
    cfg.patches_per_mesh = 1;
    cfg.min_patches_per_mesh = 1;
    let pair = build_mesh_patches(&shapes::icosphere(3), 0, &cfg, &mut seeded(6)).unwrap().pairs.remove(0);
    let weights = cfg.loss_weights();
    let uniform = cfg.uniform_config();
    let mut gan = Gan::new(&cfg).unwrap();
    let emd_of = |gan: &Gan| {
        let out = gan.generator.generate(&gan.g_params, &points_to_array(pair.input.points())).unwrap();
        emd_exact(&PointCloud::new(array_to_points(&out)).unwrap(), &pair.target).unwrap().normalized_cost()
    };
    let initial = emd_of(&gan);
    let mut last = initial;
    let mut steps = 0;
    for step in 1..=2000u64 {
        let s = generator_pass(&gan, &pair.input, &pair.target, &weights, &uniform, cfg.emd_eps).unwrap();
        gan.g_params.zero_grads();
        gan.g_params.accumulate(&s.grads, 1.0);
        gan.g_params.adam_step(cfg.learning_rate(cfg.lr_g, step), cfg.adam());
        steps = step;
        if step % 100 == 0 {
            last = emd_of(&gan);
            if last < 0.05 {
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        last < 0.05 && within(elapsed, 600),
        format!("EMD {initial:.4} -> {last:.4} after {steps} steps, {elapsed:.1?}"),
    )
}

fn adversarial_smoke() -> Outcome {
    let mut cfg = TrainConfig::desk();
    cfg.patches_per_mesh = 5;
    cfg.min_patches_per_mesh = 5;
    let mut pairs = Vec::new();
    for (id, mesh) in [shapes::icosphere(3), shapes::tetrahedron()].iter().enumerate() {
        pairs.extend(build_mesh_patches(mesh, id, &cfg, &mut seeded(70 + id as u64)).unwrap().pairs);
    }
    let mut trainer = Trainer::new(cfg).unwrap();
    let mut loss_d = Vec::new();
    for _ in 0..200 {
        match trainer.step(&pairs, &RayonMap) {
            Ok(r) => loss_d.push(r.loss_d.unwrap()),
            Err(e) => return Err(format!("pairs {} failed at {}: {e}", pairs.len(), loss_d.len() + 1)),
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (first, last) = (mean(&loss_d[..50]), mean(&loss_d[150..]));
    let gan = &trainer.gan;
    let d = gan.discriminator.as_ref().unwrap();
    let (mut real, mut fake) = (0.0, 0.0);
    for p in &pairs {
        let generated = gan.generator.generate(&gan.g_params, &points_to_array(p.input.points())).unwrap();
        fake += d.discriminate(&gan.d_params, &generated).unwrap();
        real += d.discriminate(&gan.d_params, &points_to_array(p.target.points())).unwrap();
    }
    let gap = (real - fake) / pairs.len() as f64;
    check(
        pairs.len() == 10 && loss_d.iter().all(|v| v.is_finite()) && last < first && gap > 0.1,
        format!("L_D mean {first:.4} (first 50) -> {last:.4} (last 50), D(real) - D(fake) = {gap:.4}"),
    )
}

fn pipeline_count() -> Outcome {
    let mesh = shapes::icosphere(3);
    let input = positions(&poisson_disk_sample(&mesh, 2048, &mut seeded(8)).unwrap());
    let gan = Gan::new(&TrainConfig::default()).unwrap();
    let up = GeneratorUpsampler { generator: &gan.generator, params: &gan.g_params };
    let out = upsample_cloud(&input, &up, pcup_core::train::DEFAULT_OVERLAP, &RayonMap).unwrap();
    let report = uniformity_report_mesh(&out, &mesh, 1000, 8).unwrap();
    check(
        out.len() == 8192 && report.values.iter().all(|v| v.is_finite()),
        format!("{} -> {} points, uniformity {:?}", input.len(), out.len(), report.values),
    )
}

fn poisson_quality() -> Outcome {
    let meshes: [(&str, TriangleMesh); 3] =
        [("icosphere", shapes::icosphere(3)), ("square", shapes::square(16)), ("tetrahedron", shapes::tetrahedron())];
    let mut details = Vec::new();
    let mut ok = true;
    for (i, (name, mesh)) in meshes.iter().enumerate() {
        let seed = 90 + i as u64;
        let poisson = positions(&poisson_disk_sample(mesh, 2000, &mut seeded(seed)).unwrap());
        let random = positions(&area_weighted_sample(mesh, 2000, &mut seeded(seed)).unwrap());
        let a = uniformity_report_mesh(&poisson, mesh, 1000, seed).unwrap();
        let b = uniformity_report_mesh(&random, mesh, 1000, seed).unwrap();
        let wins = a.values.iter().zip(&b.values).filter(|(p, r)| p < r).count();
        ok &= wins == UNIFORMITY_PERCENTAGES.len();
        details.push(format!("{name} {wins}/5 (p=1%: {:.3e} vs {:.3e})", a.values[3], b.values[3]));
    }
    check(ok, details.join(", "))
}

fn run_cli(args: &[&str]) -> i32 {
    main_with(std::iter::once("pcup").chain(args.iter().copied()))
}

fn tree_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn determinism() -> Outcome {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    let meshes = root.join("meshes");
    fs::create_dir(&meshes).unwrap();
    fs::write(meshes.join("ball.off"), format_off(&shapes::icosphere(3))).unwrap();
    fs::write(meshes.join("tet.off"), format_off(&shapes::tetrahedron())).unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let mut trees = Vec::new();
    for run in 0..2 {
        let (data, out) = (root.join(format!("data{run}")), root.join(format!("run{run}")));
        if run_cli(&["prepare", "--desk", "--meshes", &s(&meshes), "--out", &s(&data), "--seed", "3"]) != 0 {
            return Err("prepare failed".into());
        }
        if run_cli(&["train", "--desk", "--data", &s(&data), "--out", &s(&out), "--seed", "3"]) != 0 {
            return Err("train failed".into());
        }
        trees.push((tree_bytes(&data), tree_bytes(&out)));
    }
    let files = trees[0].0.len() + trees[0].1.len();
    let checkpoints = trees[0].1.keys().filter(|k| k.ends_with("generator.ckpt")).count();
    check(
        trees[0] == trees[1] && checkpoints == 2,
        format!("{files} files compared, {checkpoints} checkpoints, identical: {}", trees[0] == trees[1]),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("EMD oracle equivalence", emd_oracle),
        ("gradient suite", gradient_suite),
        ("uniform-loss discrimination", uniform_discrimination),
        ("spatial-query exactness", spatial_queries),
        ("architecture contracts", architecture),
        ("overfit sanity", overfit),
        ("adversarial smoke", adversarial_smoke),
        ("pipeline count contract", pipeline_count),
        ("Poisson-disk quality", poisson_quality),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} {name}: FAIL ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
