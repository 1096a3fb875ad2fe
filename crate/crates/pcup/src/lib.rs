//! File formats, dataset preparation, the training driver and the command
//! line around [`pcup_core`].
//!
//! - [`io`]: XYZ point files and ASCII OFF/PLY meshes
//! - [`checkpoint`]: versioned binary parameter files
//! - [`archive`]: on-disk training patches with a JSON manifest
//! - [`trainer`]: parallel per-sample passes, loss log, checkpoints, NaN dumps
//! - [`eval`]: whole-model metric reports
//! - [`demo`]: the uniformity comparison with SVG scatter plots
//! - [`cli`]: the `pcup` command

pub mod archive;
pub mod checkpoint;
pub mod cli;
pub mod demo;
pub mod eval;
pub mod io;
pub mod trainer;

use std::path::{Path, PathBuf};

use pcup_core::geometry::GeometryError;
use pcup_core::losses::LossError;
use pcup_core::mesh::MeshError;
use pcup_core::metrics::MetricError;
use pcup_core::model::ModelError;
use pcup_core::nn::NnError;
use pcup_core::train::TrainError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Loss(#[from] LossError),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn format(path: &Path, message: impl Into<String>) -> Self {
        Error::Format { path: path.to_path_buf(), message: message.into() }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Format { .. } => "format",
            Error::Usage(_) => "usage",
            Error::Check(_) => "check",
            Error::Train(TrainError::NonFinite { .. }) => "non-finite",
            Error::Train(_) => "train",
            Error::Mesh(_) => "mesh",
            Error::Metric(_) => "metric",
            Error::Geometry(_) => "geometry",
            Error::Model(_) => "model",
            Error::Nn(_) => "nn",
            Error::Loss(_) => "loss",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
