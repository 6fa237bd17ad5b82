//! Benchmark harness for multi-kernel RBF networks: Iris loading, the
//! experiment runner, CSV/JSON artifacts, the comparison report and the
//! step-size bound probe.

pub mod bound;
pub mod data;
pub mod error;
pub mod experiment;
pub mod format;
pub mod report;

pub use error::{CliError, Result};
pub use experiment::{run_experiment, Arch, ExperimentConfig, Manifest, Task};
