//! Step-size bound `1/λ_max` of a task's training set.

use std::fmt;

use corbf_core::trainer::{autocorrelation, max_eigenvalue};

use crate::data::load_iris;
use crate::error::Result;
use crate::experiment::{build_task, ExperimentConfig, Task};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundProbe {
    pub task: Task,
    pub samples: usize,
    pub phi_len: usize,
    pub lambda_max: f64,
    pub bound: f64,
    pub eta: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BoundProbe {
    pub fn respects(&self) -> bool {
        self.eta < self.bound
    }
}

/// Bound over the kernel vectors of the task built from `cfg.seed`, compared
/// with `cfg.train.eta`.
pub fn bound_probe(cfg: &ExperimentConfig) -> Result<BoundProbe> {
    cfg.validate()?;
    let iris = match cfg.task {
        Task::Iris => Some(load_iris()?),
        _ => None,
    };
    let task = build_task(cfg, cfg.seed, iris.as_ref())?;
    let phi = task.bank.kernel_matrix(&task.train.inputs)?;
    let power = max_eigenvalue(&autocorrelation(&phi)?)?;
    Ok(BoundProbe {
        task: cfg.task,
        samples: task.train.len(),
        phi_len: task.bank.phi_len(),
        lambda_max: power.eigenvalue,
        bound: 1.0 / power.eigenvalue,
        eta: cfg.train.eta,
        iterations: power.iterations,
        converged: power.converged,
    })
}

impl fmt::Display for BoundProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "task: {} ({} samples, kernel vector length {})", self.task, self.samples, self.phi_len)?;
        writeln!(
            f,
            "lambda_max: {:.6e} ({} power iterations{})",
            self.lambda_max,
            self.iterations,
            if self.converged { "" } else { ", not converged" }
        )?;
        writeln!(f, "bound 1/lambda_max: {:.6e}", self.bound)?;
        let verdict = if self.respects() { "respects" } else { "violates" };
        write!(f, "eta {:e} {verdict} the bound", self.eta)
    }
}
