//! Multi-seed aggregation: mean and sample standard deviation per metric.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Named per-run metrics. `None` marks an undefined value (for instance a
/// rate with a zero denominator); it is left out of the aggregate.
pub type RunMetrics = BTreeMap<String, Option<f64>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some(Summary { mean, std, min, max, n })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub metrics: BTreeMap<String, Summary>,
    pub completed: usize,
    /// Seeds whose run diverged, with the divergence error.
    pub diverged: Vec<(u64, Error)>,
}

/// Aggregates per-run outcomes in the given order. Diverged runs are counted
/// and excluded; any other error is returned.
pub fn aggregate(outcomes: &[(u64, Result<RunMetrics>)]) -> Result<Aggregate> {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut completed = 0;
    let mut diverged = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(metrics) => {
                completed += 1;
                for (name, value) in metrics {
                    let col = columns.entry(name.clone()).or_default();
                    if let Some(v) = value {
                        col.push(*v);
                    }
                }
            }
            Err(e @ Error::Divergence { .. }) => diverged.push((*seed, e.clone())),
            Err(e) => return Err(e.clone()),
        }
    }
    let metrics = columns.into_iter().filter_map(|(k, v)| summarize(&v).map(|s| (k, s))).collect();
    Ok(Aggregate { metrics, completed, diverged })
}

/// Runs `run` for seeds `seed0 .. seed0 + n_runs` in order and aggregates.
pub fn multi_seed_run<F>(seed0: u64, n_runs: usize, mut run: F) -> Result<Aggregate>
where
    F: FnMut(u64) -> Result<RunMetrics>,
{
    if n_runs == 0 {
        return Err(Error::InvalidParameter { name: "n_runs", reason: "must be >= 1" });
    }
    let outcomes: Vec<(u64, Result<RunMetrics>)> = (0..n_runs as u64).map(|i| (seed0 + i, run(seed0 + i))).collect();
    aggregate(&outcomes)
}
