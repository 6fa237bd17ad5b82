//! Discriminative power of a two-class kernel model at a single test point,
//! and a four-center geometry on which single-kernel and globally-fused
//! models have none.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::{cosine_kernel, gaussian_kernel, CosineParams, GaussianParams, KernelBank};
use crate::matrix::{dot, sq_dist, Matrix};
use crate::model::RbfModel;

/// `Ψ = Σ_{k∈A} Σ_l w_{k,l} φ_l(x, m_k) − Σ_{k∈B} Σ_l w_{k,l} φ_l(x, m_k)`
/// for head `head` of `model`, where `w_{k,l}` is the head's effective
/// weight (`w_k·α_l` for global fusion). The bias does not enter.
///
/// `class_a` and `class_b` must be disjoint and together cover every center.
pub fn discriminative_power(
    model: &RbfModel,
    head: usize,
    x: &[f64],
    class_a: &[usize],
    class_b: &[usize],
) -> Result<f64> {
    let bank = model.bank();
    let k_count = bank.num_centers();
    let mut owner = vec![None; k_count];
    for (side, set) in [(1.0, class_a), (-1.0, class_b)] {
        for &k in set {
            let slot = owner.get_mut(k).ok_or(Error::BadPartition { index: k, problem: "out of range" })?;
            if slot.is_some() {
                return Err(Error::BadPartition { index: k, problem: "listed twice" });
            }
            *slot = Some(side);
        }
    }
    if let Some(k) = owner.iter().position(Option::is_none) {
        return Err(Error::BadPartition { index: k, problem: "missing" });
    }
    let h = model.heads().get(head).ok_or(Error::InvalidParameter { name: "head", reason: "no such output head" })?;

    let phi = bank.kernel_vector(x)?;
    let mut psi = 0.0;
    for (k, side) in owner.iter().enumerate() {
        let side = side.unwrap_or_default();
        for l in 0..bank.num_kernels() {
            psi += side * h.effective_weight(k, l, k_count) * phi[bank.phi_index(k, l)];
        }
    }
    Ok(psi)
}

/// Two class-A centers, two class-B centers and a test point such that
///
/// * `d(t, A1) = d(t, B2)` and `d(t, A2) = d(t, B1)`,
/// * `∠(t, A1) > ∠(t, B1) > ∠(t, B2) > ∠(t, A2)`,
/// * `φ_c(t, A1) + φ_c(t, A2) = φ_c(t, B1) + φ_c(t, B2)`.
///
/// Distances tie across classes pairwise, so a Gaussian model with equal
/// weights sees no difference between the classes; the cosine sums tie too.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario4Center {
    pub center1_a: [f64; 2],
    pub center2_a: [f64; 2],
    pub center1_b: [f64; 2],
    pub center2_b: [f64; 2],
    pub test_point: [f64; 2],
}

/// Residuals of the defining equalities, plus whether the angle ordering holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioResiduals {
    pub dist_1a_2b: f64,
    pub dist_2a_1b: f64,
    pub cosine_sum: f64,
    pub angles_ordered: bool,
}

impl ScenarioResiduals {
    pub fn within(&self, tol: f64) -> bool {
        self.angles_ordered
            && self.dist_1a_2b.abs() <= tol
            && self.dist_2a_1b.abs() <= tol
            && self.cosine_sum.abs() <= tol
    }
}

impl Scenario4Center {
    /// Builds the geometry for the given cosine guard.
    ///
    /// The test point sits on the positive x-axis. Centers are placed by
    /// polar angle `θ` from that axis and a norm chosen so that the required
    /// distance ties hold exactly; the last angle is found by bisection so
    /// that the ε-perturbed cosine responses tie as well.
    pub fn construct(cosine: CosineParams) -> Result<Self> {
        let r = 2.0;
        let t = [r, 0.0];
        let polar = |theta: f64, rho: f64, up: bool| {
            let s = if up { 1.0 } else { -1.0 };
            [rho * libm::cos(theta), s * rho * libm::sin(theta)]
        };
        // norm of a point at angle θ and distance d from t
        let norm_at = |theta: f64, d: f64| -> Option<f64> {
            let c = libm::cos(theta);
            let disc = r * r * c * c - r * r + d * d;
            (disc >= 0.0).then(|| r * c + libm::sqrt(disc))
        };

        let deg = core::f64::consts::PI / 180.0;
        let (th_1a, th_2a, th_1b) = (80.0 * deg, 10.0 * deg, 60.0 * deg);
        let a1 = polar(th_1a, 3.0, true);
        let a2 = polar(th_2a, 5.0, false);
        let d_1a = libm::sqrt(sq_dist(&t, &a1));
        let d_2a = libm::sqrt(sq_dist(&t, &a2));
        let rho_1b = norm_at(th_1b, d_2a).ok_or(Error::InvalidParameter {
            name: "scenario",
            reason: "no center at the required angle and distance",
        })?;
        let b1 = polar(th_1b, rho_1b, false);

        let cos_k = |m: &[f64; 2]| cosine_kernel(&t, m, cosine);
        let target = cos_k(&a1)? + cos_k(&a2)? - cos_k(&b1)?;
        let b2_at = |theta: f64| norm_at(theta, d_1a).map(|rho| polar(theta, rho, true));
        // φ_c(t, B2(θ)) falls as θ grows; bracket strictly inside (θ_2A, θ_1B).
        let f = |theta: f64| -> Result<f64> {
            let b2 = b2_at(theta)
                .ok_or(Error::InvalidParameter { name: "scenario", reason: "bracket left feasible region" })?;
            Ok(cos_k(&b2)? - target)
        };
        let (mut lo, mut hi) = (th_2a + 1e-6, th_1b - 1e-6);
        if !(f(lo)? > 0.0 && f(hi)? < 0.0) {
            return Err(Error::InvalidParameter { name: "scenario", reason: "cosine tie not bracketed" });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let b2 =
            b2_at(0.5 * (lo + hi)).ok_or(Error::InvalidParameter { name: "scenario", reason: "bisection failed" })?;

        Ok(Self { center1_a: a1, center2_a: a2, center1_b: b1, center2_b: b2, test_point: t })
    }

    pub fn residuals(&self, cosine: CosineParams) -> Result<ScenarioResiduals> {
        let t = &self.test_point;
        let dist = |m: &[f64; 2]| libm::sqrt(sq_dist(t, m));
        let angle = |m: &[f64; 2]| libm::acos(dot(t, m) / libm::sqrt(dot(t, t) * dot(m, m)));
        let cos_k = |m: &[f64; 2]| cosine_kernel(t, m, cosine);
        let (a1, a2, b1, b2) = (&self.center1_a, &self.center2_a, &self.center1_b, &self.center2_b);
        Ok(ScenarioResiduals {
            dist_1a_2b: dist(a1) - dist(b2),
            dist_2a_1b: dist(a2) - dist(b1),
            cosine_sum: cos_k(a1)? + cos_k(a2)? - cos_k(b1)? - cos_k(b2)?,
            angles_ordered: angle(a1) > angle(b1) && angle(b1) > angle(b2) && angle(b2) > angle(a2),
        })
    }

    /// Centers in the order `[A1, A2, B1, B2]`.
    pub fn centers(&self) -> Matrix {
        Matrix::from_columns(&[self.center1_a, self.center2_a, self.center1_b, self.center2_b])
            .expect("four 2-D centers")
    }

    /// Center indices of class A and class B within [`centers`](Self::centers).
    pub fn partition() -> (Vec<usize>, Vec<usize>) {
        (vec![0, 1], vec![2, 3])
    }

    pub fn bank(&self, gaussian: GaussianParams, cosine: CosineParams) -> Result<KernelBank> {
        KernelBank::new(self.centers(), gaussian, cosine)
    }

    /// `Σ_A φ_g − Σ_B φ_g` with unit weights, straight from the kernel.
    pub fn gaussian_gap(&self, p: GaussianParams) -> Result<f64> {
        let t = &self.test_point;
        Ok(gaussian_kernel(t, &self.center1_a, p)? + gaussian_kernel(t, &self.center2_a, p)?
            - gaussian_kernel(t, &self.center1_b, p)?
            - gaussian_kernel(t, &self.center2_b, p)?)
    }
}
