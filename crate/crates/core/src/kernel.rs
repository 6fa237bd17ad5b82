//! Primary kernels and the stacked kernel response vector.
//!
//! The kernel vector of an input `x` against a bank of `K` centers and `L`
//! primary kernels is laid out as
//!
//! ```text
//! φ(x) = [1, φ_0(x, m_1) .. φ_0(x, m_K), φ_1(x, m_1) .. φ_1(x, m_K), ...]
//! ```
//!
//! The leading `1` feeds the output bias. Each primary kernel occupies one
//! contiguous block of `K` entries, in the order given by the bank.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, sq_dist, Matrix};

pub const DEFAULT_COSINE_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianParams {
    sigma: f64,
}

impl GaussianParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter { name: "sigma", reason: "must be finite and > 0" });
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CosineParams {
    epsilon: f64,
}

impl CosineParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter { name: "epsilon", reason: "must be finite and > 0" });
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Default for CosineParams {
    fn default() -> Self {
        Self { epsilon: DEFAULT_COSINE_EPSILON }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum KernelId {
    Gaussian,
    Cosine,
}

/// `exp(-‖x − m‖² / σ²)`
pub fn gaussian_kernel(x: &[f64], m: &[f64], p: GaussianParams) -> Result<f64> {
    check_dims(x, m)?;
    Ok(gaussian_unchecked(x, m, p))
}

/// `(x·m) / (‖x‖‖m‖ + ε)`. A zero vector on either side gives exactly 0.
pub fn cosine_kernel(x: &[f64], m: &[f64], p: CosineParams) -> Result<f64> {
    check_dims(x, m)?;
    Ok(cosine_unchecked(x, m, p))
}

#[inline]
fn gaussian_unchecked(x: &[f64], m: &[f64], p: GaussianParams) -> f64 {
    libm::exp(-sq_dist(x, m) / (p.sigma * p.sigma))
}

#[inline]
fn cosine_unchecked(x: &[f64], m: &[f64], p: CosineParams) -> f64 {
    let nx = libm::sqrt(dot(x, x));
    let nm = libm::sqrt(dot(m, m));
    dot(x, m) / (nx * nm + p.epsilon)
}

fn check_dims(x: &[f64], m: &[f64]) -> Result<()> {
    if x.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: m.len(), actual: x.len() });
    }
    Ok(())
}

/// The centers plus the primary kernels evaluated against each of them.
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelBank {
    centers: Matrix,
    gaussian: GaussianParams,
    cosine: CosineParams,
    kernel_order: Vec<KernelId>,
}

impl KernelBank {
    /// Bank with the standard two-kernel order: Gaussian block, then cosine block.
    pub fn new(centers: Matrix, gaussian: GaussianParams, cosine: CosineParams) -> Result<Self> {
        Self::with_order(centers, gaussian, cosine, vec![KernelId::Gaussian, KernelId::Cosine])
    }

    pub fn with_order(
        centers: Matrix,
        gaussian: GaussianParams,
        cosine: CosineParams,
        kernel_order: Vec<KernelId>,
    ) -> Result<Self> {
        if centers.cols() == 0 {
            return Err(Error::Empty("kernel bank centers"));
        }
        if centers.rows() == 0 {
            return Err(Error::InvalidParameter { name: "centers", reason: "zero-dimensional input space" });
        }
        if !centers.is_finite() {
            return Err(Error::NonFinite("kernel bank centers"));
        }
        if kernel_order.is_empty() {
            return Err(Error::Empty("kernel order"));
        }
        for (i, k) in kernel_order.iter().enumerate() {
            if kernel_order[..i].contains(k) {
                return Err(Error::InvalidParameter { name: "kernel_order", reason: "duplicate kernel" });
            }
        }
        Ok(Self { centers, gaussian, cosine, kernel_order })
    }

    pub fn centers(&self) -> &Matrix {
        &self.centers
    }

    pub fn gaussian(&self) -> GaussianParams {
        self.gaussian
    }

    pub fn cosine(&self) -> CosineParams {
        self.cosine
    }

    pub fn kernel_order(&self) -> &[KernelId] {
        &self.kernel_order
    }

    /// Input-space dimension `a`.
    pub fn input_dim(&self) -> usize {
        self.centers.rows()
    }

    /// Number of centers `K`.
    pub fn num_centers(&self) -> usize {
        self.centers.cols()
    }

    /// Number of primary kernels `L`.
    pub fn num_kernels(&self) -> usize {
        self.kernel_order.len()
    }

    /// `1 + K·L`
    pub fn phi_len(&self) -> usize {
        1 + self.num_centers() * self.num_kernels()
    }

    /// Index into the kernel vector of kernel block `l`, center `k`.
    #[inline]
    pub fn phi_index(&self, k: usize, l: usize) -> usize {
        1 + l * self.num_centers() + k
    }

    /// Evaluates primary kernel `id` between `x` and center `k`.
    pub fn eval(&self, id: KernelId, x: &[f64], k: usize) -> Result<f64> {
        let m = self.centers.col(k);
        match id {
            KernelId::Gaussian => gaussian_kernel(x, m, self.gaussian),
            KernelId::Cosine => cosine_kernel(x, m, self.cosine),
        }
    }

    pub fn kernel_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.phi_len()];
        self.kernel_vector_into(x, &mut out)?;
        Ok(out)
    }

    /// Writes the kernel vector of `x` into `out`, which must have length
    /// [`phi_len`](Self::phi_len).
    pub fn kernel_vector_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), actual: x.len() });
        }
        if out.len() != self.phi_len() {
            return Err(Error::DimensionMismatch { expected: self.phi_len(), actual: out.len() });
        }
        let k_count = self.num_centers();
        out[0] = 1.0;
        for (l, id) in self.kernel_order.iter().enumerate() {
            let block = &mut out[1 + l * k_count..1 + (l + 1) * k_count];
            for (k, slot) in block.iter_mut().enumerate() {
                let m = self.centers.col(k);
                *slot = match id {
                    KernelId::Gaussian => gaussian_unchecked(x, m, self.gaussian),
                    KernelId::Cosine => cosine_unchecked(x, m, self.cosine),
                };
            }
        }
        Ok(())
    }

    /// Kernel vectors of every column of `inputs`, one per column.
    pub fn kernel_matrix(&self, inputs: &Matrix) -> Result<Matrix> {
        let mut phi = Matrix::zeros(self.phi_len(), inputs.cols());
        for s in 0..inputs.cols() {
            self.kernel_vector_into(inputs.col(s), phi.col_mut(s))?;
        }
        Ok(phi)
    }
}
