//! Multi-kernel radial basis function networks.
//!
//! Hidden units pair every center with two primary kernels, a Gaussian and a
//! cosine kernel. Three ways of fusing the kernel responses are provided:
//! a fixed convex mix, a globally adapted mix, and coordinated fusion where
//! each (center, kernel) pair learns its own output weight. Training is
//! plain per-sample gradient descent on the squared error.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the
//! experiment runner and the command-line tool live in `corbf-cli`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod centers;
mod error;
pub mod kernel;
mod matrix;
pub mod metrics;
pub mod model;
pub mod scenario;
pub mod stats;
pub mod tasks;
pub mod trainer;

pub use error::{Error, Result};
pub use kernel::{CosineParams, GaussianParams, KernelBank, KernelId};
pub use matrix::Matrix;
pub use model::{multiclass_decision, FusionMode, OutputHead, RbfModel};
pub use tasks::Dataset;
pub use trainer::{fit, sgd_step, TrainConfig, TrainTrace, WeightInit};
