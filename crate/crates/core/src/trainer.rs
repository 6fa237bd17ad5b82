//! Per-sample stochastic gradient descent and the learning-rate bound.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::KernelBank;
use crate::matrix::Matrix;
use crate::metrics::to_db;
use crate::model::{multiclass_decision, FusionMode, OutputHead, RbfModel};
use crate::tasks::Dataset;

/// Errors larger than this abort training.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum WeightInit {
    Zeros,
    Uniform { lo: f64, hi: f64 },
}

impl Default for WeightInit {
    fn default() -> Self {
        WeightInit::Uniform { lo: -0.1, hi: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Present samples in a fresh seed-derived order every epoch instead of
    /// dataset order.
    pub shuffle: bool,
    pub init: WeightInit,
    /// Step size for adaptive-fusion coefficients; `None` reuses `eta`.
    pub alpha_eta: Option<f64>,
}

impl TrainConfig {
    pub fn new(eta: f64, epochs: usize, seed: u64) -> Self {
        Self { eta, epochs, seed, shuffle: false, init: WeightInit::default(), alpha_eta: None }
    }

    pub fn alpha_eta(&self) -> f64 {
        self.alpha_eta.unwrap_or(self.eta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter { name: "eta", reason: "must be finite and > 0" });
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter { name: "epochs", reason: "must be >= 1" });
        }
        if let Some(a) = self.alpha_eta {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter { name: "alpha_eta", reason: "must be finite and > 0" });
            }
        }
        if let WeightInit::Uniform { lo, hi } = self.init {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidParameter { name: "init", reason: "uniform range needs lo < hi" });
            }
        }
        Ok(())
    }

    /// Fresh model whose weights and biases are drawn from `self.init` using
    /// a stream of `self.seed`. Fusion coefficients come from `mode` as given.
    pub fn initial_model(&self, bank: KernelBank, mode: FusionMode, outputs: usize) -> Result<RbfModel> {
        self.validate()?;
        let n = mode.weight_len(bank.num_centers(), bank.num_kernels());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(INIT_STREAM);
        let mut draw = || match self.init {
            WeightInit::Zeros => 0.0,
            WeightInit::Uniform { lo, hi } => rng.random_range(lo..hi),
        };
        let heads = (0..outputs)
            .map(|_| {
                let bias = draw();
                let weights = (0..n).map(|_| draw()).collect();
                OutputHead::new(mode.clone(), weights, bias)
            })
            .collect();
        RbfModel::new(bank, heads)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    pub mse: f64,
    pub mse_db: f64,
    pub train_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub test_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    pub model: RbfModel,
}

impl TrainTrace {
    pub fn last(&self) -> &EpochRecord {
        self.epochs.last().expect("at least one epoch")
    }
}

/// One presentation of `(x, d)` to a single-output model. Returns the error
/// `d − y` measured before the update.
pub fn sgd_step(model: &mut RbfModel, x: &[f64], d: f64, eta: f64) -> Result<f64> {
    sgd_step_with_alpha_rate(model, x, d, eta, eta)
}

pub fn sgd_step_with_alpha_rate(model: &mut RbfModel, x: &[f64], d: f64, eta: f64, alpha_eta: f64) -> Result<f64> {
    if !(eta > 0.0 && alpha_eta > 0.0) {
        return Err(Error::InvalidParameter { name: "eta", reason: "must be > 0" });
    }
    if model.num_outputs() != 1 {
        return Err(Error::InvalidParameter { name: "model", reason: "sgd_step needs a single-output model" });
    }
    let phi = model.bank().kernel_vector(x)?;
    let mut e = [0.0];
    step_phi(model, &phi, &[d], eta, alpha_eta, &mut e).map_err(|err| match err {
        Error::Divergence { error, .. } => Error::Divergence { epoch: 0, sample: 0, error },
        other => other,
    })?;
    Ok(e[0])
}

/// Updates every head from one kernel vector. `errors` receives `d − y`
/// per head, computed before any parameter moves.
fn step_phi(
    model: &mut RbfModel,
    phi: &[f64],
    targets: &[f64],
    eta: f64,
    alpha_eta: f64,
    errors: &mut [f64],
) -> Result<()> {
    let k = model.bank().num_centers();
    for ((h, &d), e_out) in model.heads_mut().iter_mut().zip(targets).zip(errors.iter_mut()) {
        let e = d - h.output(phi, k);
        if e.is_nan() || e.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { epoch: 0, sample: 0, error: e });
        }
        h.apply_update(phi, k, e, eta, alpha_eta);
        *e_out = e;
    }
    Ok(())
}

/// Runs `cfg.epochs` passes of per-sample SGD over `train`, starting from
/// `model`. After each epoch the training MSE is measured over the whole
/// training set (averaged over samples and output heads), along with
/// accuracies when the sets carry class labels and the test MSE when an
/// evaluation set is given.
pub fn fit(mut model: RbfModel, train: &Dataset, cfg: &TrainConfig, eval: Option<&Dataset>) -> Result<TrainTrace> {
    cfg.validate()?;
    check_dataset(&model, train)?;
    if let Some(ev) = eval {
        check_dataset(&model, ev)?;
    }
    let bank = model.bank().clone();
    let phi_train = bank.kernel_matrix(&train.inputs)?;
    let phi_eval = eval.map(|ev| bank.kernel_matrix(&ev.inputs)).transpose()?;

    let s_count = train.len();
    let c_count = model.num_outputs();
    let mut order: Vec<usize> = (0..s_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut errors = vec![0.0; c_count];
    let mut records = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        for &s in &order {
            step_phi(&mut model, phi_train.col(s), train.targets.col(s), cfg.eta, cfg.alpha_eta(), &mut errors)
                .map_err(|err| match err {
                    Error::Divergence { error, .. } => Error::Divergence { epoch, sample: s, error },
                    other => other,
                })?;
        }
        let tr = evaluate_phi(&model, &phi_train, train).map_err(|_| non_finite_at(epoch))?;
        let te = match (eval, &phi_eval) {
            (Some(ev), Some(pe)) => Some(evaluate_phi(&model, pe, ev).map_err(|_| non_finite_at(epoch))?),
            _ => None,
        };
        records.push(EpochRecord {
            epoch,
            mse: tr.mse,
            mse_db: to_db(tr.mse),
            train_acc: tr.accuracy,
            test_acc: te.and_then(|t| t.accuracy),
            test_mse: te.map(|t| t.mse),
        });
    }
    Ok(TrainTrace { epochs: records, model })
}

fn non_finite_at(epoch: usize) -> Error {
    Error::Divergence { epoch, sample: 0, error: f64::NAN }
}

fn check_dataset(model: &RbfModel, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if data.inputs.rows() != model.bank().input_dim() {
        return Err(Error::DimensionMismatch { expected: model.bank().input_dim(), actual: data.inputs.rows() });
    }
    if data.targets.rows() != model.num_outputs() {
        return Err(Error::DimensionMismatch { expected: model.num_outputs(), actual: data.targets.rows() });
    }
    Ok(())
}

/// Fit quality of a model on a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Mean of `(d − y)²` over samples and output heads.
    pub mse: f64,
    /// Fraction of argmax decisions matching the labels, when labelled.
    pub accuracy: Option<f64>,
}

pub fn evaluate(model: &RbfModel, data: &Dataset) -> Result<Evaluation> {
    check_dataset(model, data)?;
    let phi = model.bank().kernel_matrix(&data.inputs)?;
    evaluate_phi(model, &phi, data)
}

fn evaluate_phi(model: &RbfModel, phi: &Matrix, data: &Dataset) -> Result<Evaluation> {
    let c = model.num_outputs();
    let mut out = vec![0.0; c];
    let mut sq = 0.0;
    let mut correct = 0usize;
    for s in 0..data.len() {
        model.outputs_from_phi(phi.col(s), &mut out)?;
        for (y, d) in out.iter().zip(data.targets.col(s)) {
            sq += (d - y) * (d - y);
        }
        if let Some(labels) = &data.labels {
            if multiclass_decision(&out)? == labels[s] {
                correct += 1;
            }
        }
    }
    Ok(Evaluation {
        mse: sq / (data.len() * c) as f64,
        accuracy: data.labels.as_ref().map(|_| correct as f64 / data.len() as f64),
    })
}

/// Sample autocorrelation `R = (1/S) Σ_s φ_s φ_sᵀ` of the columns of `phi`.
pub fn autocorrelation(phi: &Matrix) -> Result<Matrix> {
    let s = phi.cols();
    if s == 0 {
        return Err(Error::Empty("kernel vectors"));
    }
    let n = phi.rows();
    let mut r = Matrix::zeros(n, n);
    for col in phi.columns() {
        for j in 0..n {
            let cj = col[j];
            if cj == 0.0 {
                continue;
            }
            for (rij, ci) in r.col_mut(j).iter_mut().zip(col) {
                *rij += ci * cj;
            }
        }
    }
    let inv = 1.0 / s as f64;
    r.as_mut_slice().iter_mut().for_each(|v| *v *= inv);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration. Each run stops once `‖Rv − λv‖ <= 1e-10·λ` or after 10 000
/// iterations.
///
/// The normalized all-ones vector is orthogonal to the dominant eigenvector
/// whenever the centers are placed symmetrically (the cosine block then has
/// an odd leading eigenvector), so a second run starts from an irregular
/// positive vector and the larger estimate wins.
pub fn max_eigenvalue(r: &Matrix) -> Result<PowerIteration> {
    let n = r.rows();
    if n == 0 || r.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: r.cols() });
    }
    let ones = vec![1.0; n];
    // Weyl sequence: positive, and never symmetric under index reversal
    let irregular: Vec<f64> = (1..=n).map(|i| 0.5 + (i as f64 * 0.618_033_988_749_894_9).fract()).collect();
    let mut best: Option<PowerIteration> = None;
    let mut iterations = 0;
    for start in [ones, irregular] {
        if let Some(p) = power_from(r, start) {
            iterations += p.iterations;
            if best.is_none_or(|b| p.eigenvalue > b.eigenvalue) {
                best = Some(p);
            }
        }
    }
    let best = match best {
        Some(b) => b,
        None => {
            // both starts lie in the null space; restart on the largest diagonal
            let j = (0..n).fold(0, |b, i| if r.get(i, i) > r.get(b, b) { i } else { b });
            if r.get(j, j) <= 0.0 {
                return Err(Error::ZeroAutocorrelation);
            }
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let p = power_from(r, e).ok_or(Error::ZeroAutocorrelation)?;
            iterations += p.iterations;
            p
        }
    };
    Ok(PowerIteration { iterations, ..best })
}

/// Power iteration from `v`; `None` when the iterate collapses to zero.
fn power_from(r: &Matrix, mut v: Vec<f64>) -> Option<PowerIteration> {
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut w = vec![0.0; v.len()];
    mat_vec(r, &v, &mut w);
    let mut lambda = 0.0;
    for it in 1..=POWER_MAX_ITERATIONS {
        lambda = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let resid = libm::sqrt(w.iter().zip(&v).map(|(wi, vi)| (wi - lambda * vi) * (wi - lambda * vi)).sum());
        if lambda > 0.0 && resid <= POWER_TOLERANCE * lambda {
            return Some(PowerIteration { eigenvalue: lambda, iterations: it, converged: true });
        }
        let nw = norm(&w);
        if nw == 0.0 {
            return None;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        mat_vec(r, &v, &mut w);
    }
    (lambda > 0.0).then_some(PowerIteration { eigenvalue: lambda, iterations: POWER_MAX_ITERATIONS, converged: false })
}

fn mat_vec(m: &Matrix, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &vj) in v.iter().enumerate() {
        for (o, mij) in out.iter_mut().zip(m.col(j)) {
            *o += mij * vj;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Mean-convergence step-size bound `1/λ_max(R)` for kernel vectors stacked
/// as the columns of `phi`.
pub fn learning_rate_bound(phi: &Matrix) -> Result<f64> {
    let r = autocorrelation(phi)?;
    Ok(1.0 / max_eigenvalue(&r)?.eigenvalue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CosineParams, GaussianParams};

    fn bank1() -> KernelBank {
        KernelBank::new(
            Matrix::from_columns(&[[0.5, -0.25]]).unwrap(),
            GaussianParams::new(1.0).unwrap(),
            CosineParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_error_leaves_model_unchanged() {
        let x = [0.1, 0.3];
        for mode in [FusionMode::fixed_uniform(2), FusionMode::adaptive_uniform(2), FusionMode::Co] {
            let n = mode.weight_len(1, 2);
            let mut m = RbfModel::single(bank1(), OutputHead::new(mode, vec![0.3; n], 0.2)).unwrap();
            let d = m.forward(&x).unwrap();
            let before = m.clone();
            let e = sgd_step(&mut m, &x, d, 0.5).unwrap();
            assert_eq!(e, 0.0);
            assert_eq!(m, before);
        }
    }

    #[test]
    fn single_step_by_hand() {
        let mut m = RbfModel::zeros(bank1(), FusionMode::Co, 1).unwrap();
        let x = [0.5, -0.25];
        let phi_c = m.bank().kernel_vector(&x).unwrap()[2];
        let e = sgd_step(&mut m, &x, 1.0, 0.1).unwrap();
        assert_eq!(e, 1.0);
        let h = &m.heads()[0];
        assert_eq!(h.weights()[0], 0.1);
        assert_eq!(h.weights()[1], 0.1 * phi_c);
        assert_eq!(h.bias(), 0.1);
    }

    #[test]
    fn fixed_mode_keeps_alpha() {
        let mut m = RbfModel::zeros(bank1(), FusionMode::Fixed { alpha: vec![0.3, 0.7] }, 1).unwrap();
        sgd_step(&mut m, &[1.0, 1.0], 2.0, 0.1).unwrap();
        assert_eq!(m.heads()[0].mode().alpha().unwrap(), &[0.3, 0.7]);
    }

    #[test]
    fn divergence_guard_trips() {
        let mut m = RbfModel::zeros(bank1(), FusionMode::Co, 1).unwrap();
        assert!(matches!(sgd_step(&mut m, &[0.5, -0.25], 1e13, 0.1), Err(Error::Divergence { .. })));
        assert!(matches!(sgd_step(&mut m, &[0.5, -0.25], f64::NAN, 0.1), Err(Error::Divergence { .. })));
    }

    #[test]
    fn bad_config_rejected() {
        assert!(TrainConfig::new(0.0, 5, 0).validate().is_err());
        assert!(TrainConfig::new(0.1, 0, 0).validate().is_err());
        let mut c = TrainConfig::new(0.1, 1, 0);
        c.init = WeightInit::Uniform { lo: 1.0, hi: -1.0 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn identity_autocorrelation_bound_is_one() {
        // three basis vectors, each once: R = I/3 -> bound 3; scale by √3 for R = I
        let c = libm::sqrt(3.0);
        let phi = Matrix::from_columns(&[[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, c]]).unwrap();
        assert!((learning_rate_bound(&phi).unwrap() - 1.0).abs() < 1e-12);
        let e1 = Matrix::from_columns(&[[1.0, 0.0, 0.0]]).unwrap();
        assert!((learning_rate_bound(&e1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_phi_has_no_bound() {
        assert_eq!(learning_rate_bound(&Matrix::zeros(4, 3)), Err(Error::ZeroAutocorrelation));
        assert!(learning_rate_bound(&Matrix::zeros(4, 0)).is_err());
    }

    #[test]
    fn dominant_direction_orthogonal_to_ones() {
        // eigenpairs (1, [1, 1]) and (4, [1, -1])
        let r = Matrix::from_columns(&[[2.5, -1.5], [-1.5, 2.5]]).unwrap();
        let p = max_eigenvalue(&r).unwrap();
        assert!(p.converged);
        assert!((p.eigenvalue - 4.0).abs() < 1e-9, "{p:?}");
    }

    #[test]
    fn symmetric_scalar_centers() {
        // inputs ±1 against centers symmetric about zero: the cosine block is
        // rank one along sign(m), which sums to zero
        let bank = KernelBank::new(
            Matrix::from_col_major(1, 5, vec![-100.0, -50.0, 0.0, 50.0, 100.0]).unwrap(),
            GaussianParams::new(0.5).unwrap(),
            CosineParams::default(),
        )
        .unwrap();
        let x = Matrix::from_col_major(1, 4, vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let bound = learning_rate_bound(&bank.kernel_matrix(&x).unwrap()).unwrap();
        assert!((1.0 / bound - 4.0).abs() < 1e-6, "{}", 1.0 / bound);
    }
}
