//! Network state and forward passes for the three fusion architectures.
//!
//! All three share one [`KernelBank`]. They differ in how a hidden unit
//! mixes its primary-kernel responses:
//!
//! * [`FusionMode::Fixed`]: one global convex mix `Σ_l α_l φ_l`, frozen.
//! * [`FusionMode::Adaptive`]: the same global mix, with `α` learned.
//! * [`FusionMode::Co`]: every (center, kernel) pair has its own weight,
//!   so the output is simply `φᵀw` over the stacked kernel vector.
//!
//! A model carries one or more output heads over the shared bank. Each head
//! has its own weights, bias and (for adaptive fusion) its own `α`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::KernelBank;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum FusionMode {
    /// Frozen convex coefficients, one per primary kernel.
    Fixed { alpha: Vec<f64> },
    /// Global coefficients updated by gradient descent; unconstrained once training starts.
    Adaptive { alpha: Vec<f64> },
    /// Per-center, per-kernel weights. Holds no coefficients of its own.
    Co,
}

impl FusionMode {
    /// Equal-weight fixed fusion over `l` kernels.
    pub fn fixed_uniform(l: usize) -> Self {
        FusionMode::Fixed { alpha: vec![1.0 / l as f64; l] }
    }

    pub fn adaptive_uniform(l: usize) -> Self {
        FusionMode::Adaptive { alpha: vec![1.0 / l as f64; l] }
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        match self {
            FusionMode::Fixed { alpha } | FusionMode::Adaptive { alpha } => Some(alpha),
            FusionMode::Co => None,
        }
    }

    pub fn is_co(&self) -> bool {
        matches!(self, FusionMode::Co)
    }

    /// Number of hidden-to-output weights for a bank of `k` centers, `l` kernels.
    pub fn weight_len(&self, k: usize, l: usize) -> usize {
        if self.is_co() {
            k * l
        } else {
            k
        }
    }

    fn validate(&self, l: usize) -> Result<()> {
        match self {
            FusionMode::Fixed { alpha } => {
                check_alpha_len(alpha, l)?;
                if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(Error::InvalidParameter { name: "alpha", reason: "fixed fusion needs 0 <= α <= 1" });
                }
                let sum: f64 = alpha.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter { name: "alpha", reason: "fixed fusion needs Σα = 1" });
                }
                Ok(())
            }
            FusionMode::Adaptive { alpha } => {
                check_alpha_len(alpha, l)?;
                if alpha.iter().any(|a| !a.is_finite()) {
                    return Err(Error::NonFinite("alpha"));
                }
                Ok(())
            }
            FusionMode::Co => Ok(()),
        }
    }
}

fn check_alpha_len(alpha: &[f64], l: usize) -> Result<()> {
    if alpha.len() != l {
        return Err(Error::DimensionMismatch { expected: l, actual: alpha.len() });
    }
    Ok(())
}

/// One linear output unit over the shared kernel bank.
///
/// For [`FusionMode::Co`] the weights form the `K×L` matrix `W` stored
/// column-major, so `weights[l·K + k]` pairs with kernel-vector entry
/// `1 + l·K + k`. Otherwise there is one weight per center.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutputHead {
    pub(crate) mode: FusionMode,
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
}

impl OutputHead {
    pub fn new(mode: FusionMode, weights: Vec<f64>, bias: f64) -> Self {
        Self { mode, weights, bias }
    }

    /// Co-fusion head from a `K×L` weight matrix.
    pub fn co(weights: &Matrix, bias: f64) -> Self {
        Self { mode: FusionMode::Co, weights: weights.as_slice().to_vec(), bias }
    }

    pub fn mode(&self) -> &FusionMode {
        &self.mode
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Weight multiplying primary kernel `l` at center `k`, after folding in
    /// any global fusion coefficient.
    pub fn effective_weight(&self, k: usize, l: usize, k_count: usize) -> f64 {
        match &self.mode {
            FusionMode::Co => self.weights[l * k_count + k],
            FusionMode::Fixed { alpha } | FusionMode::Adaptive { alpha } => self.weights[k] * alpha[l],
        }
    }

    /// Output for a precomputed kernel vector.
    #[inline]
    pub fn output(&self, phi: &[f64], k_count: usize) -> f64 {
        match &self.mode {
            FusionMode::Co => {
                let mut y = self.bias;
                for (w, p) in self.weights.iter().zip(&phi[1..]) {
                    y += w * p;
                }
                y
            }
            FusionMode::Fixed { alpha } | FusionMode::Adaptive { alpha } => {
                let mut y = self.bias;
                for (k, w) in self.weights.iter().enumerate() {
                    let mut mixed = 0.0;
                    for (l, a) in alpha.iter().enumerate() {
                        mixed += a * phi[1 + l * k_count + k];
                    }
                    y += w * mixed;
                }
                y
            }
        }
    }

    /// Trainable parameters flattened as `[bias, weights.., α..]`; `α` is
    /// present only for adaptive fusion.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(1 + self.weights.len() + 2);
        p.push(self.bias);
        p.extend_from_slice(&self.weights);
        if let FusionMode::Adaptive { alpha } = &self.mode {
            p.extend_from_slice(alpha);
        }
        p
    }

    /// Inverse of [`parameters`](Self::parameters).
    pub fn set_parameters(&mut self, p: &[f64]) -> Result<()> {
        let n_alpha = match &self.mode {
            FusionMode::Adaptive { alpha } => alpha.len(),
            _ => 0,
        };
        let expected = 1 + self.weights.len() + n_alpha;
        if p.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: p.len() });
        }
        self.bias = p[0];
        let nw = self.weights.len();
        self.weights.copy_from_slice(&p[1..1 + nw]);
        if let FusionMode::Adaptive { alpha } = &mut self.mode {
            alpha.copy_from_slice(&p[1 + nw..]);
        }
        Ok(())
    }

    /// One stochastic-gradient step on `½e²`, given the error `e = d − y`
    /// already computed from the current parameters. Every increment uses the
    /// pre-step parameter values.
    pub(crate) fn apply_update(&mut self, phi: &[f64], k_count: usize, e: f64, eta: f64, alpha_eta: f64) {
        let step = eta * e;
        match &mut self.mode {
            FusionMode::Co => {
                for (w, p) in self.weights.iter_mut().zip(&phi[1..]) {
                    *w += step * p;
                }
            }
            FusionMode::Fixed { alpha } => {
                for (k, w) in self.weights.iter_mut().enumerate() {
                    let mixed: f64 = alpha.iter().enumerate().map(|(l, a)| a * phi[1 + l * k_count + k]).sum();
                    *w += step * mixed;
                }
            }
            FusionMode::Adaptive { alpha } => {
                // ∂y/∂α_l = Σ_k w_k φ_l(x, m_k), taken before w moves.
                let mut alpha_grad = vec![0.0; alpha.len()];
                for (l, g) in alpha_grad.iter_mut().enumerate() {
                    let block = &phi[1 + l * k_count..1 + (l + 1) * k_count];
                    *g = self.weights.iter().zip(block).map(|(w, p)| w * p).sum();
                }
                for (k, w) in self.weights.iter_mut().enumerate() {
                    let mixed: f64 = alpha.iter().enumerate().map(|(l, a)| a * phi[1 + l * k_count + k]).sum();
                    *w += step * mixed;
                }
                for (a, g) in alpha.iter_mut().zip(&alpha_grad) {
                    *a += alpha_eta * e * g;
                }
            }
        }
        self.bias += step;
    }

    fn validate(&self, k: usize, l: usize) -> Result<()> {
        self.mode.validate(l)?;
        let expected = self.mode.weight_len(k, l);
        if self.weights.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: self.weights.len() });
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("model weights"));
        }
        Ok(())
    }

    fn params_finite(&self) -> bool {
        self.bias.is_finite()
            && self.weights.iter().all(|w| w.is_finite())
            && self.mode.alpha().is_none_or(|a| a.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RbfModel {
    bank: KernelBank,
    heads: Vec<OutputHead>,
}

impl RbfModel {
    pub fn new(bank: KernelBank, heads: Vec<OutputHead>) -> Result<Self> {
        if heads.is_empty() {
            return Err(Error::Empty("output heads"));
        }
        let (k, l) = (bank.num_centers(), bank.num_kernels());
        for h in &heads {
            h.validate(k, l)?;
        }
        Ok(Self { bank, heads })
    }

    pub fn single(bank: KernelBank, head: OutputHead) -> Result<Self> {
        Self::new(bank, vec![head])
    }

    /// All weights and biases zero.
    pub fn zeros(bank: KernelBank, mode: FusionMode, outputs: usize) -> Result<Self> {
        let n = mode.weight_len(bank.num_centers(), bank.num_kernels());
        let heads = (0..outputs).map(|_| OutputHead::new(mode.clone(), vec![0.0; n], 0.0)).collect();
        Self::new(bank, heads)
    }

    pub fn bank(&self) -> &KernelBank {
        &self.bank
    }

    pub fn heads(&self) -> &[OutputHead] {
        &self.heads
    }

    pub fn heads_mut(&mut self) -> &mut [OutputHead] {
        &mut self.heads
    }

    pub fn num_outputs(&self) -> usize {
        self.heads.len()
    }

    /// Output of a single-output model.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if self.heads.len() != 1 {
            return Err(Error::InvalidParameter { name: "model", reason: "forward needs a single-output model" });
        }
        let phi = self.bank.kernel_vector(x)?;
        self.checked(self.heads[0].output(&phi, self.bank.num_centers()))
    }

    /// Every head's output for one input.
    pub fn outputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        let phi = self.bank.kernel_vector(x)?;
        let mut out = vec![0.0; self.heads.len()];
        self.outputs_from_phi(&phi, &mut out)?;
        Ok(out)
    }

    /// Head outputs for a precomputed kernel vector.
    pub fn outputs_from_phi(&self, phi: &[f64], out: &mut [f64]) -> Result<()> {
        if phi.len() != self.bank.phi_len() {
            return Err(Error::DimensionMismatch { expected: self.bank.phi_len(), actual: phi.len() });
        }
        let k = self.bank.num_centers();
        for (o, h) in out.iter_mut().zip(&self.heads) {
            *o = self.checked(h.output(phi, k))?;
        }
        Ok(())
    }

    /// Column-wise [`forward`](Self::forward) of a single-output model.
    pub fn forward_batch(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        inputs.columns().map(|x| self.forward(x)).collect()
    }

    /// Equivalent co-fusion model with `w_{k,l} = w_k·α_l`. Co-fusion heads
    /// are copied unchanged.
    pub fn to_co_fusion(&self) -> RbfModel {
        let (k_count, l_count) = (self.bank.num_centers(), self.bank.num_kernels());
        let heads = self
            .heads
            .iter()
            .map(|h| {
                let mut w = vec![0.0; k_count * l_count];
                for l in 0..l_count {
                    for k in 0..k_count {
                        w[l * k_count + k] = h.effective_weight(k, l, k_count);
                    }
                }
                OutputHead::new(FusionMode::Co, w, h.bias)
            })
            .collect();
        RbfModel { bank: self.bank.clone(), heads }
    }

    fn checked(&self, y: f64) -> Result<f64> {
        if y.is_finite() {
            Ok(y)
        } else if self.heads.iter().all(OutputHead::params_finite) {
            Err(Error::NonFinite("model output"))
        } else {
            Err(Error::NonFinite("model weights"))
        }
    }
}

/// Index of the largest output; the lowest index wins ties.
pub fn multiclass_decision(outputs: &[f64]) -> Result<usize> {
    let (&first, rest) = outputs.split_first().ok_or(Error::Empty("output vector"))?;
    let mut best = (0, first);
    for (i, &v) in rest.iter().enumerate() {
        if v > best.1 {
            best = (i + 1, v);
        }
    }
    Ok(best.0)
}
