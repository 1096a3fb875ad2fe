//! Allocation-only core of a point cloud upsampling GAN.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the training
//! driver and the command line live in the `pcup` crate.
//!
//! - [`geometry`]: points, kd-tree queries, farthest point sampling, normalization
//! - [`mesh`]: triangle meshes, surface and Poisson-disk sampling, geodesic patches,
//!   point-to-surface distance
//! - [`metrics`]: Chamfer, Hausdorff, EMD (exact and auction) and uniformity
//! - [`nn`]: a small reverse-mode autodiff engine with Adam
//! - [`model`]: generator and discriminator networks
//! - [`losses`]: adversarial, uniform and reconstruction losses
//! - [`patterns`]: hexagonal, random and clustered planar test patterns
//! - [`train`]: configuration, augmentation, per-step gradients and patch-based inference
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod geometry;
pub mod losses;
pub mod math;
pub mod mesh;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod patterns;
pub mod rng;
pub mod train;

