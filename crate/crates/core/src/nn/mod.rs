//! A minimal reverse-mode autodiff engine over dense `f64` matrices, with
//! the layers the networks are built from and an Adam optimizer.
//!
//! A [`Graph`] records one forward evaluation. Trainable tensors live in a
//! [`Params`] store; [`Graph::param`] copies them in as leaves and
//! [`Graph::param_grads`] hands their gradients back after
//! [`Graph::backward`].

mod array;
pub mod gradcheck;
mod graph;
mod layers;
mod params;

pub use array::Array2;
pub use graph::{Graph, Var};
pub use layers::{Linear, Mlp, SelfAttention};
pub use params::{AdamConfig, ParamGrads, ParamId, Params};

use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    Shape { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("loss must be 1x1, got {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },
    #[error("{op}: empty input")]
    Empty { op: &'static str },
    #[error("data length {len} does not fill a {rows}x{cols} array")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
}
