//! Figures of merit: MSE in dB, one-vs-rest confusion counts, sensitivity,
//! specificity, Youden index, and error surfaces.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::RbfModel;

/// `10·log10(mse)`; zero maps to negative infinity.
pub fn to_db(mse: f64) -> f64 {
    10.0 * libm::log10(mse)
}

pub fn mse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Empty("error vector"));
    }
    Ok(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64)
}

/// Mean squared error in decibels. All-zero errors give `f64::NEG_INFINITY`.
pub fn mse_db(errors: &[f64]) -> Result<f64> {
    mse(errors).map(to_db)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// One-vs-rest counts for each of `C` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub classes: Vec<ClassCounts>,
    pub samples: usize,
}

impl ConfusionCounts {
    /// `Σ TP / N`
    pub fn accuracy(&self) -> f64 {
        self.classes.iter().map(|c| c.tp).sum::<usize>() as f64 / self.samples as f64
    }
}

pub fn confusion(pred: &[usize], truth: &[usize], classes: usize) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: pred.len() });
    }
    if pred.is_empty() {
        return Err(Error::Empty("label vectors"));
    }
    if let Some(&label) = pred.iter().chain(truth).find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    let mut counts = alloc::vec![ClassCounts::default(); classes];
    for (&p, &t) in pred.iter().zip(truth) {
        for (c, cc) in counts.iter_mut().enumerate() {
            match (p == c, t == c) {
                (true, true) => cc.tp += 1,
                (true, false) => cc.fp += 1,
                (false, true) => cc.fn_ += 1,
                (false, false) => cc.tn += 1,
            }
        }
    }
    Ok(ConfusionCounts { classes: counts, samples: pred.len() })
}

/// Per-class rates. A rate whose denominator is zero is `None`, and so is
/// any Youden index built from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRates {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub youden: Option<f64>,
}

pub fn sensitivity_specificity_youden(cc: &ConfusionCounts) -> Vec<ClassRates> {
    cc.classes.iter().map(class_rates).collect()
}

pub fn class_rates(c: &ClassCounts) -> ClassRates {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let youden = sensitivity.zip(specificity).map(|(se, sp)| se + sp - 1.0);
    ClassRates { sensitivity, specificity, youden }
}

/// Signed error `d − y` of a single-output, 2-D input model over a grid.
/// `errors[i·ys.len() + j]` belongs to `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSurface {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub errors: Vec<f64>,
}

impl ErrorSurface {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.errors[i * self.ys.len() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.errors.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

pub fn error_surface<F>(model: &RbfModel, xs: &[f64], ys: &[f64], truth: F) -> Result<ErrorSurface>
where
    F: Fn(f64, f64) -> f64,
{
    if model.bank().input_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: model.bank().input_dim() });
    }
    let mut errors = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        for &y in ys {
            errors.push(truth(x, y) - model.forward(&[x, y])?);
        }
    }
    Ok(ErrorSurface { xs: xs.to_vec(), ys: ys.to_vec(), errors })
}
