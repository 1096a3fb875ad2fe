//! Training data, the alternating generator/discriminator updates and
//! patch-based inference.
//!
//! - [`config`]: every run setting, the learning-rate schedule, ablations
//! - [`data`]: geodesic training patches, input sampling, augmentation
//! - [`step`]: per-sample gradient passes and the deterministic trainer
//! - [`infer`]: upsampling whole clouds patch by patch

pub mod config;
pub mod data;
pub mod infer;
pub mod step;

pub use config::{Ablation, Ablations, TrainConfig};
pub use data::{augment, build_mesh_patches, sample_input, MeshPatches, PatchPair};
pub use infer::{upsample_cloud, GeneratorUpsampler, PatchUpsampler, DEFAULT_OVERLAP};
pub use step::{
    discriminator_pass, generator_pass, DiscriminatorSample, Gan, GeneratorSample, SampleMap, Sequential, StepReport,
    Trainer,
};

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::losses::LossError;
use crate::mesh::MeshError;
use crate::model::ModelError;
use crate::nn::NnError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("mesh {mesh_id}: only {succeeded} patches succeeded, {required} required")]
    TooFewPatches { mesh_id: usize, succeeded: usize, required: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("patch has {got} points, expected {expected}")]
    PatchSize { expected: usize, got: usize },
    #[error("non-finite {stage} loss or gradient at iteration {iteration}")]
    NonFinite { iteration: u64, stage: &'static str, batch: Vec<usize> },
}
