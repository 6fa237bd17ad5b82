//! Center selection: subtractive clustering, regular lattices, and fixed lists.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};

/// Parameters of potential-based subtractive clustering. Radii are measured
/// in the per-feature min-max normalized input space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubtractiveConfig {
    pub influence_radius: f64,
    pub squash_radius: f64,
    pub accept_ratio: f64,
    pub reject_ratio: f64,
    pub max_centers: Option<usize>,
}

impl SubtractiveConfig {
    /// Defaults around the given influence radius: squash radius 1.5·r_a,
    /// accept ratio 0.5, reject ratio 0.15, no center cap.
    pub fn with_influence(influence_radius: f64) -> Self {
        Self {
            influence_radius,
            squash_radius: 1.5 * influence_radius,
            accept_ratio: 0.5,
            reject_ratio: 0.15,
            max_centers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.influence_radius > 0.0 && self.influence_radius.is_finite()) {
            return bad("influence_radius", "must be finite and > 0");
        }
        if !(self.squash_radius >= self.influence_radius && self.squash_radius.is_finite()) {
            return bad("squash_radius", "must be >= influence_radius");
        }
        if !(self.accept_ratio > 0.0 && self.accept_ratio <= 1.0) {
            return bad("accept_ratio", "must lie in (0, 1]");
        }
        if !(self.reject_ratio >= 0.0 && self.reject_ratio < self.accept_ratio) {
            return bad("reject_ratio", "must lie in [0, accept_ratio)");
        }
        if self.max_centers == Some(0) {
            return bad("max_centers", "must be positive");
        }
        Ok(())
    }
}

/// Selected centers plus the sample index each one was taken from, in
/// selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centers: Matrix,
    pub indices: Vec<usize>,
}

/// Subtractive clustering over the columns of `samples`.
///
/// Every sample starts with potential `P_i = Σ_j exp(−4‖x_i − x_j‖² / r_a²)`.
/// The highest-potential sample (lowest index on ties) becomes a candidate;
/// accepting it subtracts `P_k · exp(−4‖x_i − x_k‖² / r_b²)` from every
/// potential. Candidates above `accept_ratio · P_1` are accepted, those below
/// `reject_ratio · P_1` end the search, and in between a candidate is kept
/// only if `d_min / r_a + P_k / P_1 >= 1`; otherwise its potential is zeroed
/// and the next candidate is tried.
pub fn subtractive_clustering(samples: &Matrix, cfg: &SubtractiveConfig) -> Result<Clustering> {
    cfg.validate()?;
    let n = samples.cols();
    if n == 0 || samples.rows() == 0 {
        return Err(Error::Empty("dataset"));
    }
    if !samples.is_finite() {
        return Err(Error::NonFinite("clustering input"));
    }

    let norm = normalize_unit_box(samples);
    let alpha = 4.0 / (cfg.influence_radius * cfg.influence_radius);
    let beta = 4.0 / (cfg.squash_radius * cfg.squash_radius);

    let mut potential: Vec<f64> = (0..n)
        .map(|i| {
            let xi = norm.col(i);
            (0..n).map(|j| libm::exp(-alpha * sq_dist(xi, norm.col(j)))).sum()
        })
        .collect();

    let cap = cfg.max_centers.unwrap_or(n).min(n);
    let mut chosen: Vec<usize> = Vec::new();
    let mut first_potential = 0.0;

    while chosen.len() < cap {
        let (k, pk) = argmax_first(&potential);
        if pk <= 0.0 {
            break;
        }
        if chosen.is_empty() {
            first_potential = pk;
        }

        let accept = if pk > cfg.accept_ratio * first_potential {
            true
        } else if pk < cfg.reject_ratio * first_potential {
            break;
        } else {
            let d_min =
                chosen.iter().map(|&c| libm::sqrt(sq_dist(norm.col(k), norm.col(c)))).fold(f64::INFINITY, f64::min);
            d_min / cfg.influence_radius + pk / first_potential >= 1.0
        };

        if accept {
            let xk = norm.col(k);
            for (i, p) in potential.iter_mut().enumerate() {
                *p -= pk * libm::exp(-beta * sq_dist(norm.col(i), xk));
            }
            // Force the selected point out even if rounding left it positive.
            potential[k] = 0.0;
            chosen.push(k);
        } else {
            potential[k] = 0.0;
        }
    }

    Ok(Clustering { centers: samples.select_columns(&chosen), indices: chosen })
}

/// Per-feature min-max scaling into [0, 1]. Constant features map to 0.
fn normalize_unit_box(samples: &Matrix) -> Matrix {
    let a = samples.rows();
    let mut lo = vec![f64::INFINITY; a];
    let mut hi = vec![f64::NEG_INFINITY; a];
    for c in samples.columns() {
        for (f, &v) in c.iter().enumerate() {
            lo[f] = lo[f].min(v);
            hi[f] = hi[f].max(v);
        }
    }
    let mut out = samples.clone();
    for j in 0..out.cols() {
        for (f, v) in out.col_mut(j).iter_mut().enumerate() {
            let span = hi[f] - lo[f];
            *v = if span > 0.0 { (*v - lo[f]) / span } else { 0.0 };
        }
    }
    out
}

fn argmax_first(v: &[f64]) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

/// All points of the axis-aligned lattice over `[lo, hi]` with the given
/// spacing. The first axis varies slowest. Coordinates are built as
/// `lo + index·step`, so they never accumulate drift.
pub fn grid_centers(lo: &[f64], hi: &[f64], step: f64) -> Result<Matrix> {
    if lo.is_empty() {
        return Err(Error::Empty("grid bounds"));
    }
    if lo.len() != hi.len() {
        return Err(Error::DimensionMismatch { expected: lo.len(), actual: hi.len() });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter { name: "step", reason: "must be finite and > 0" });
    }
    if lo.iter().zip(hi).any(|(l, h)| !l.is_finite() || !h.is_finite() || l >= h) {
        return Err(Error::InvalidParameter { name: "grid bounds", reason: "need finite lo < hi on every axis" });
    }

    let axes: Vec<Vec<f64>> = lo.iter().zip(hi).map(|(&l, &h)| axis_points(l, h, step)).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let a = lo.len();
    let mut data = Vec::with_capacity(total * a);
    let mut idx = vec![0usize; a];
    for _ in 0..total {
        data.extend(idx.iter().zip(&axes).map(|(&i, ax)| ax[i]));
        // odometer increment, last axis fastest
        for d in (0..a).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Matrix::from_col_major(a, total, data)
}

/// `lo + i·step` for `i = 0 ..= floor((hi − lo) / step)`, tolerant of the
/// quotient landing a hair below an integer.
pub(crate) fn axis_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = libm::floor((hi - lo) / step + 1e-9) as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

/// Assembles a center matrix from an explicit list, preserving order and
/// duplicates.
pub fn fixed_centers<V: AsRef<[f64]>>(values: &[V]) -> Result<Matrix> {
    if values.is_empty() {
        return Err(Error::Empty("center list"));
    }
    let m = Matrix::from_columns(values)?;
    if m.rows() == 0 {
        return Err(Error::InvalidParameter { name: "centers", reason: "zero-dimensional center" });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_is_its_own_center() {
        let x = Matrix::from_columns(&[[2.5, -1.0]]).unwrap();
        let c = subtractive_clustering(&x, &SubtractiveConfig::with_influence(0.2)).unwrap();
        assert_eq!(c.indices, vec![0]);
        assert_eq!(c.centers, x);
    }

    #[test]
    fn two_isolated_clusters() {
        let mut cols = Vec::new();
        for _ in 0..10 {
            cols.push([1.0, 1.0]);
        }
        for _ in 0..10 {
            cols.push([9.0, -4.0]);
        }
        let x = Matrix::from_columns(&cols).unwrap();
        let c = subtractive_clustering(&x, &SubtractiveConfig::with_influence(0.1)).unwrap();
        assert_eq!(c.centers.cols(), 2);
        assert_eq!(c.centers.col(0), &[1.0, 1.0]);
        assert_eq!(c.centers.col(1), &[9.0, -4.0]);
        // lowest index wins the tie on equal potentials
        assert_eq!(c.indices, vec![0, 10]);
    }

    #[test]
    fn empty_dataset_rejected() {
        let x = Matrix::zeros(2, 0);
        assert_eq!(subtractive_clustering(&x, &SubtractiveConfig::with_influence(0.2)), Err(Error::Empty("dataset")));
    }

    #[test]
    fn max_centers_caps_output() {
        let cols: Vec<[f64; 1]> = (0..30).map(|i| [i as f64]).collect();
        let x = Matrix::from_columns(&cols).unwrap();
        let mut cfg = SubtractiveConfig::with_influence(0.05);
        cfg.max_centers = Some(3);
        assert_eq!(subtractive_clustering(&x, &cfg).unwrap().centers.cols(), 3);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = SubtractiveConfig::with_influence(0.2);
        cfg.squash_radius = 0.1;
        assert!(cfg.validate().is_err());
        let mut cfg = SubtractiveConfig::with_influence(0.2);
        cfg.reject_ratio = 0.6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grid_one_axis() {
        let g = grid_centers(&[0.0], &[1.0], 0.5).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_corners_row_major() {
        let g = grid_centers(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(g.cols(), 4);
        assert_eq!(g.as_slice(), &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn grid_121_points() {
        let g = grid_centers(&[-1.0, -1.0], &[1.0, 1.0], 0.2).unwrap();
        assert_eq!(g.cols(), 121);
        assert_eq!(g.col(0), &[-1.0, -1.0]);
        assert_eq!(g.col(120), &[-1.0 + 10.0 * 0.2, -1.0 + 10.0 * 0.2]);
    }

    #[test]
    fn grid_step_larger_than_interval() {
        let g = grid_centers(&[0.0, 0.0], &[1.0, 1.0], 5.0).unwrap();
        assert_eq!(g.cols(), 1);
    }

    #[test]
    fn grid_rejects_inverted_bounds() {
        assert!(grid_centers(&[1.0], &[0.0], 0.1).is_err());
        assert!(grid_centers(&[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn fixed_list_preserves_order_and_duplicates() {
        let m = fixed_centers(&[[-100.0], [-50.0], [0.0], [50.0], [-100.0]]).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 5));
        assert_eq!(m.as_slice(), &[-100.0, -50.0, 0.0, 50.0, -100.0]);
        assert_eq!(fixed_centers(&[[3.0, 4.0]]).unwrap().cols(), 1);
        assert_eq!(fixed_centers(&[[1.0, 1.0], [1.0, 1.0]]).unwrap().cols(), 2);
    }

    #[test]
    fn fixed_list_ragged_rejected() {
        let v: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(fixed_centers(&v).is_err());
        let empty: Vec<Vec<f64>> = Vec::new();
        assert!(fixed_centers(&empty).is_err());
    }
}
