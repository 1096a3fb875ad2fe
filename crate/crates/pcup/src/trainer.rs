//! The training driver: parallel per-sample passes, the loss log,
//! periodic checkpoints and a dump of the offending batch on non-finite
//! values.
//!
//! Output directory layout:
//!
//! ```text
//! <out>/config.txt          every setting as `key = value`
//! <out>/loss_log.csv        one row per iteration
//! <out>/ckpt_000250/        see [`crate::checkpoint`]
//! <out>/nan_dump_000123/    only after a non-finite failure
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pcup_core::train::{PatchPair, SampleMap, StepReport, TrainConfig, TrainError, Trainer};
use rayon::prelude::*;

use crate::archive::read_archive;
use crate::checkpoint::write_checkpoint;
use crate::io::write_xyz;
use crate::{create_dir, write_file, Error, Result};

/// Runs per-sample work on the rayon pool, keeping index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonMap;

impl SampleMap for RayonMap {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }
}

pub const LOG_HEADER: &str = "iteration,lr_g,lr_d,loss_g,loss_adv,loss_rec,loss_uni,loss_d,d_real,d_fake";

/// One CSV row of the loss log; absent discriminator values are empty.
pub fn log_line(r: &StepReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    format!(
        "{},{:?},{},{:?},{:?},{:?},{:?},{},{},{}",
        r.iteration,
        r.lr_g,
        opt(r.lr_d),
        r.loss_g,
        r.loss_adv,
        r.loss_rec,
        r.loss_uni,
        opt(r.loss_d),
        opt(r.d_real),
        opt(r.d_fake)
    )
}

/// Result of a finished run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub reports: Vec<StepReport>,
    pub checkpoints: Vec<PathBuf>,
}

/// Trains on the archive in `data_dir`, writing into `out_dir`.
pub fn train_from_archive(
    data_dir: &Path,
    out_dir: &Path,
    cfg: &TrainConfig,
    progress: impl FnMut(&StepReport),
) -> Result<TrainOutcome> {
    let (manifest, pairs) = read_archive(data_dir)?;
    if manifest.n != cfg.n || manifest.r != cfg.r {
        return Err(Error::Usage(format!(
            "archive holds N={} r={} patches but the configuration asks for N={} r={}",
            manifest.n, manifest.r, cfg.n, cfg.r
        )));
    }
    train(&pairs, out_dir, cfg, progress)
}

/// Trains on `pairs` for `cfg.total_iterations(pairs.len())` iterations.
pub fn train(
    pairs: &[PatchPair],
    out_dir: &Path,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&StepReport),
) -> Result<TrainOutcome> {
    if pairs.is_empty() {
        return Err(TrainError::EmptyDataset.into());
    }
    create_dir(out_dir)?;
    write_file(&out_dir.join("config.txt"), cfg.to_key_values())?;
    let log_path = out_dir.join("loss_log.csv");
    let file = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut log = BufWriter::new(file);
    writeln!(log, "{LOG_HEADER}").map_err(|e| Error::io(&log_path, e))?;

    let mut trainer = Trainer::new(cfg.clone())?;
    let total = cfg.total_iterations(pairs.len());
    let mut reports = Vec::with_capacity(total as usize);
    let mut checkpoints = Vec::new();
    for _ in 0..total {
        let report = match trainer.step(pairs, &RayonMap) {
            Ok(r) => r,
            Err(TrainError::NonFinite { iteration, stage, batch }) => {
                log.flush().map_err(|e| Error::io(&log_path, e))?;
                dump_batch(out_dir, &trainer, pairs, iteration, stage, &batch)?;
                return Err(TrainError::NonFinite { iteration, stage, batch }.into());
            }
            Err(e) => return Err(e.into()),
        };
        writeln!(log, "{}", log_line(&report)).map_err(|e| Error::io(&log_path, e))?;
        progress(&report);
        let it = report.iteration;
        reports.push(report);
        if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0) || it == total {
            let dir = out_dir.join(format!("ckpt_{it:06}"));
            write_checkpoint(&dir, &trainer)?;
            checkpoints.push(dir);
        }
    }
    log.flush().map_err(|e| Error::io(&log_path, e))?;
    Ok(TrainOutcome { reports, checkpoints })
}

/// Writes the augmented batch of `iteration` and a short description.
fn dump_batch(
    out_dir: &Path,
    trainer: &Trainer,
    pairs: &[PatchPair],
    iteration: u64,
    stage: &str,
    batch: &[usize],
) -> Result<()> {
    let dir = out_dir.join(format!("nan_dump_{iteration:06}"));
    create_dir(&dir)?;
    let indices: Vec<String> = batch.iter().map(usize::to_string).collect();
    write_file(
        &dir.join("info.txt"),
        format!("iteration = {iteration}\nstage = {stage}\nbatch = {}\n", indices.join(",")),
    )?;
    for (j, pair) in trainer.prepare_batch(pairs, iteration)?.iter().enumerate() {
        write_xyz(&dir.join(format!("sample_{j:02}_input.xyz")), &pair.input)?;
        write_xyz(&dir.join(format!("sample_{j:02}_gt.xyz")), &pair.target)?;
    }
    write_checkpoint(&dir.join("state"), trainer)
}
