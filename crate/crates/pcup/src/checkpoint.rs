//! Parameter checkpoints.
//!
//! A checkpoint file starts with the magic line `PCUP-CHECKPOINT 1`, then
//! `tensors <count>`, one `<name> <rows> <cols>` line per tensor and `end`.
//! The payload that follows holds every tensor's values in header order as
//! little-endian 64-bit floats, row-major.
//!
//! A checkpoint directory holds `config.txt` (the training configuration as
//! `key = value` lines), `generator.ckpt`, `discriminator.ckpt` when a
//! discriminator is trained, and `state.txt` with the iteration count.

use std::path::Path;

use pcup_core::model::Generator;
use pcup_core::nn::{Array2, Params};
use pcup_core::rng::seeded;
use pcup_core::train::{Trainer, TrainConfig};

use crate::{create_dir, read_text, write_file, Error, Result};

pub const MAGIC: &str = "PCUP-CHECKPOINT 1";

pub fn encode_params(params: &Params) -> Vec<u8> {
    let tensors: Vec<(&str, &Array2)> = params.named_values().collect();
    let mut header = format!("{MAGIC}\ntensors {}\n", tensors.len());
    for (name, value) in &tensors {
        header.push_str(&format!("{name} {} {}\n", value.rows(), value.cols()));
    }
    header.push_str("end\n");
    let mut bytes = header.into_bytes();
    for (_, value) in &tensors {
        for v in value.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

pub fn decode_tensors(bytes: &[u8], path: &Path) -> Result<Vec<(String, Array2)>> {
    let bad = |message: &str| Error::format(path, message.to_string());
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').ok_or_else(|| bad("truncated header"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("header is not ASCII"))?;
        pos += end + 1;
        Ok(line)
    };
    if next_line()? != MAGIC {
        return Err(bad("not a checkpoint (bad magic line)"));
    }
    let count: usize = next_line()?
        .strip_prefix("tensors ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad("malformed tensor count"))?;
    let mut shapes = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next_line()?;
        let parts: Vec<&str> = line.split(' ').collect();
        let [name, rows, cols] = parts[..] else {
            return Err(bad("malformed tensor line"));
        };
        let rows: usize = rows.parse().map_err(|_| bad("malformed tensor rows"))?;
        let cols: usize = cols.parse().map_err(|_| bad("malformed tensor cols"))?;
        shapes.push((name.to_string(), rows, cols));
    }
    if next_line()? != "end" {
        return Err(bad("missing end of header"));
    }
    let total: usize = shapes.iter().map(|(_, r, c)| r * c).sum();
    if bytes.len() - pos != total * 8 {
        return Err(bad("payload size does not match header"));
    }
    let mut values = bytes[pos..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    shapes
        .into_iter()
        .map(|(name, rows, cols)| {
            let data: Vec<f64> = values.by_ref().take(rows * cols).collect();
            Ok((name, Array2::from_vec(rows, cols, data)?))
        })
        .collect()
}

pub fn write_params(path: &Path, params: &Params) -> Result<()> {
    write_file(path, encode_params(params))
}

/// Loads tensor values into `params`; names and shapes must match exactly.
pub fn read_params_into(path: &Path, params: &mut Params) -> Result<()> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let tensors = decode_tensors(&bytes, path)?;
    params.load_values(tensors).map_err(|e| Error::format(path, e.to_string()))
}

/// Writes a checkpoint directory for the trainer's current state.
pub fn write_checkpoint(dir: &Path, trainer: &Trainer) -> Result<()> {
    create_dir(dir)?;
    write_file(&dir.join("config.txt"), trainer.cfg.to_key_values())?;
    write_params(&dir.join("generator.ckpt"), &trainer.gan.g_params)?;
    if trainer.gan.discriminator.is_some() {
        write_params(&dir.join("discriminator.ckpt"), &trainer.gan.d_params)?;
    }
    write_file(&dir.join("state.txt"), format!("iteration = {}\n", trainer.iteration))
}

/// The configuration, generator and generator parameters of a checkpoint
/// directory.
pub fn load_generator(dir: &Path) -> Result<(TrainConfig, Generator, Params)> {
    let config_path = dir.join("config.txt");
    let cfg = TrainConfig::from_key_values(&read_text(&config_path)?)
        .map_err(|e| Error::format(&config_path, e.to_string()))?;
    let mut params = Params::new();
    let generator = Generator::new(cfg.generator_config(), &mut params, &mut seeded(0))?;
    read_params_into(&dir.join("generator.ckpt"), &mut params)?;
    Ok((cfg, generator, params))
}
