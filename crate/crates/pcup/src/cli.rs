//! The `pcup` command.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.
//! Failures print a single `error: <kind>: <message>` line on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pcup_core::train::{upsample_cloud, Ablation, GeneratorUpsampler, TrainConfig};

use crate::archive::prepare;
use crate::checkpoint::load_generator;
use crate::eval::{evaluate, write_report, EVAL_SEEDS};
use crate::io::{load_mesh, read_xyz, write_xyz};
use crate::trainer::{train_from_archive, RayonMap};
use crate::{demo, read_text, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "pcup", version, about = "Point cloud upsampling: data preparation, training, inference and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract geodesic training patches from a directory of meshes
    Prepare(PrepareArgs),
    /// Train the generator and discriminator on a patch archive
    Train(TrainArgs),
    /// Upsample an XYZ point cloud with a trained checkpoint
    Upsample(UpsampleArgs),
    /// Write a metric report for a prediction against a mesh and ground truth
    Eval(EvalArgs),
    /// Score clustered, random and hexagonal patterns and plot them as SVG
    UniformityDemo(DemoArgs),
}

/// Settings shared by `prepare` and `train`; flags override the file.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Start from the CPU-sized profile instead of the full-size defaults
    #[arg(long)]
    pub desk: bool,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Directory of ASCII .off or .ply meshes
    #[arg(long, value_name = "DIR")]
    pub meshes: PathBuf,
    /// Output archive directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Patches per mesh [default: 200]
    #[arg(long)]
    pub patches_per_mesh: Option<usize>,
    /// Input points per patch [default: 256]
    #[arg(long = "N", alias = "n", value_name = "N")]
    pub n: Option<usize>,
    /// Upsampling rate [default: 4]
    #[arg(long)]
    pub r: Option<usize>,
    /// Fraction of the surface covered by a patch [default: 0.05]
    #[arg(long)]
    pub patch_fraction: Option<f64>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Patch archive written by `prepare`
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Output directory for the log and checkpoints
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Remove a component: discriminator, uniform-loss, attention, up-down-up,
    /// farthest-sampling, or baseline (the last four together); repeatable
    #[arg(long, value_name = "COMPONENT")]
    pub ablate: Vec<String>,
    /// Iteration count, overriding the epoch-based count
    #[arg(long)]
    pub iterations: Option<u64>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct UpsampleArgs {
    /// Input XYZ point cloud
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Checkpoint directory (`ckpt_NNNNNN`)
    #[arg(long, value_name = "DIR")]
    pub ckpt: PathBuf,
    /// Output XYZ file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Patch seeds per input point relative to one patch per N points
    #[arg(long, default_value_t = pcup_core::train::DEFAULT_OVERLAP)]
    pub overlap: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted XYZ point cloud
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Reference mesh (.off or .ply)
    #[arg(long, value_name = "FILE")]
    pub mesh: PathBuf,
    /// Ground-truth XYZ point cloud
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,
    /// Output CSV report
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Model name in the report [default: the prediction file stem]
    #[arg(long)]
    pub name: Option<String>,
    /// Seeds of the uniformity report
    #[arg(long, default_value_t = EVAL_SEEDS)]
    pub seeds: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Output directory for the CSV and SVG files
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn base_config(args: &ConfigArgs) -> Result<TrainConfig> {
    let base = if args.desk { TrainConfig::desk() } else { TrainConfig::default() };
    let mut cfg = match &args.config {
        Some(path) => TrainConfig::from_key_values_over(base, &read_text(path)?)
            .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?,
        None => base,
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn checked(cfg: TrainConfig) -> Result<TrainConfig> {
    cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run_prepare(args: &PrepareArgs) -> Result<()> {
    let mut cfg = base_config(&args.config)?;
    if let Some(v) = args.patches_per_mesh {
        cfg.patches_per_mesh = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.r {
        cfg.r = v;
    }
    if let Some(v) = args.patch_fraction {
        cfg.patch_fraction = v;
    }
    let cfg = checked(cfg)?;
    let outcomes = prepare(&args.meshes, &args.out, &cfg)?;
    let mut failed = 0;
    for o in &outcomes {
        match &o.error {
            Some(e) => {
                failed += 1;
                eprintln!("warning: {}: mesh failed: {e}", o.source);
            }
            None => {
                if o.failed_patches > 0 {
                    eprintln!("warning: {}: {} patches failed", o.source, o.failed_patches);
                }
                println!("{}: {} patches", o.source, o.patches);
            }
        }
    }
    if failed > 0 {
        return Err(Error::Check(format!("{failed} of {} meshes failed", outcomes.len())));
    }
    Ok(())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let mut cfg = base_config(&args.config)?;
    for name in &args.ablate {
        let a: Ablation = name.parse().map_err(|e: pcup_core::train::TrainError| Error::Usage(e.to_string()))?;
        cfg.ablations.apply(a);
    }
    if let Some(v) = args.iterations {
        cfg.iterations = v;
    }
    let cfg = checked(cfg)?;
    let outcome = train_from_archive(&args.data, &args.out, &cfg, |_| {})?;
    if let Some(last) = outcome.reports.last() {
        println!("iterations: {}", last.iteration);
        println!("loss_g: {:?}", last.loss_g);
        if let Some(d) = last.loss_d {
            println!("loss_d: {d:?}");
        }
    }
    for c in &outcome.checkpoints {
        println!("checkpoint: {}", c.display());
    }
    Ok(())
}

fn run_upsample(args: &UpsampleArgs) -> Result<()> {
    if !(args.overlap > 0.0) {
        return Err(Error::Usage("overlap must be positive".into()));
    }
    let (_, generator, params) = load_generator(&args.ckpt)?;
    let input = read_xyz(&args.input)?;
    let up = GeneratorUpsampler { generator: &generator, params: &params };
    let out = upsample_cloud(&input, &up, args.overlap, &RayonMap)?;
    write_xyz(&args.out, &out)?;
    println!("{} -> {} points", input.len(), out.len());
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let pred = read_xyz(&args.pred)?;
    let gt = read_xyz(&args.gt)?;
    let mesh = load_mesh(&args.mesh)?;
    let name = args.name.clone().unwrap_or_else(|| stem(&args.pred));
    let report = evaluate(&name, &pred, &mesh, &gt, args.seeds, args.seed)?;
    write_report(&args.out, &report)?;
    print!("{}", report.to_csv());
    Ok(())
}

fn run_demo(args: &DemoArgs) -> Result<()> {
    for p in demo::run(&args.out, args.seed)? {
        println!("{}: {:?}", p.name, p.loss);
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Prepare(a) => run_prepare(a),
        Command::Train(a) => run_train(a),
        Command::Upsample(a) => run_upsample(a),
        Command::Eval(a) => run_eval(a),
        Command::UniformityDemo(a) => run_demo(a),
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}
