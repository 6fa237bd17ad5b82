//! Datasets for the three benchmark problems: Iris classification, a 2-D
//! function approximation grid, and a square-wave-driven nonlinear plant.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::centers::axis_points;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Samples as columns of `inputs` (`a×S`), desired responses as columns of
/// `targets` (`C×S`, one row per output head), and class labels when the
/// task is a classification task.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Matrix,
    pub targets: Matrix,
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(inputs: Matrix, targets: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if inputs.cols() != targets.cols() {
            return Err(Error::DimensionMismatch { expected: inputs.cols(), actual: targets.cols() });
        }
        if let Some(l) = &labels {
            if l.len() != inputs.cols() {
                return Err(Error::DimensionMismatch { expected: inputs.cols(), actual: l.len() });
            }
        }
        Ok(Self { inputs, targets, labels })
    }

    /// Single-output regression set.
    pub fn regression(inputs: Matrix, targets: &[f64]) -> Result<Self> {
        let t = Matrix::from_col_major(1, targets.len(), targets.to_vec())?;
        Self::new(inputs, t, None)
    }

    /// Classification set with one-hot `{0, 1}` targets over `classes` heads.
    pub fn classification(inputs: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        let mut t = Matrix::zeros(classes, labels.len());
        for (s, &l) in labels.iter().enumerate() {
            if l >= classes {
                return Err(Error::LabelOutOfRange { label: l, classes });
            }
            t.set(l, s, 1.0);
        }
        Self::new(inputs, t, Some(labels))
    }

    pub fn len(&self) -> usize {
        self.inputs.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.cols() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.rows()
    }
}

pub const IRIS_CLASSES: [&str; 3] = ["setosa", "versicolor", "virginica"];
pub const IRIS_TRAIN_PER_CLASS: usize = 40;
pub const IRIS_TEST_PER_CLASS: usize = 10;

/// Splits Iris-shaped data (`features` columns with labels in `0..3`) into
/// 40 training and 10 test samples per class, drawn by a seed-derived
/// permutation within each class. The training half comes back in one
/// seed-derived random order across classes, the test half in the original
/// sample order.
pub fn iris_split(features: &Matrix, labels: &[usize], seed: u64) -> Result<(Dataset, Dataset)> {
    if features.cols() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.cols(), actual: labels.len() });
    }
    let classes = IRIS_CLASSES.len();
    let per_class = IRIS_TRAIN_PER_CLASS + IRIS_TEST_PER_CLASS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for c in 0..classes {
        let mut members: Vec<usize> = labels.iter().enumerate().filter(|(_, &l)| l == c).map(|(i, _)| i).collect();
        if members.len() != per_class {
            return Err(Error::InvalidParameter { name: "iris", reason: "each class needs exactly 50 samples" });
        }
        members.shuffle(&mut rng);
        train_idx.extend_from_slice(&members[..IRIS_TRAIN_PER_CLASS]);
        test_idx.extend_from_slice(&members[IRIS_TRAIN_PER_CLASS..]);
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label: l, classes });
    }
    train_idx.shuffle(&mut rng);
    test_idx.sort_unstable();
    let make = |idx: &[usize]| {
        Dataset::classification(features.select_columns(idx), idx.iter().map(|&i| labels[i]).collect(), classes)
    };
    Ok((make(&train_idx)?, make(&test_idx)?))
}

/// Target surface for the function approximation task:
/// `exp(c1·x1² + c2·x2²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FunApproxTarget {
    pub c1: f64,
    pub c2: f64,
}

impl FunApproxTarget {
    /// `exp(x1² − x2²)`, the default reading of the task's target.
    pub const EXP_X1SQ_MINUS_X2SQ: Self = Self { c1: 1.0, c2: -1.0 };

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        libm::exp(self.c1 * x1 * x1 + self.c2 * x2 * x2)
    }
}

impl Default for FunApproxTarget {
    fn default() -> Self {
        Self::EXP_X1SQ_MINUS_X2SQ
    }
}

/// Lattice axes of the function approximation task.
pub const FUNAPPROX_TRAIN_AXIS: (f64, f64) = (-1.0, 1.0);
pub const FUNAPPROX_TEST_AXIS: (f64, f64) = (-0.9, 0.9);
pub const FUNAPPROX_STEP: f64 = 0.2;

pub fn funapprox_axis(range: (f64, f64)) -> Vec<f64> {
    axis_points(range.0, range.1, FUNAPPROX_STEP)
}

/// Training grid over `[−1, 1]²` (121 points) and test grid over
/// `[−0.9, 0.9]²` (100 points), both at spacing 0.2.
pub fn gen_function_approx(target: FunApproxTarget) -> Result<(Dataset, Dataset)> {
    let build = |range| {
        let axis = funapprox_axis(range);
        let mut cols = Vec::with_capacity(axis.len() * axis.len());
        let mut d = Vec::with_capacity(axis.len() * axis.len());
        for &x1 in &axis {
            for &x2 in &axis {
                cols.push([x1, x2]);
                d.push(target.eval(x1, x2));
            }
        }
        Dataset::regression(Matrix::from_columns(&cols)?, &d)
    };
    Ok((build(FUNAPPROX_TRAIN_AXIS)?, build(FUNAPPROX_TEST_AXIS)?))
}

pub const SYSID_LENGTH: usize = 400;
pub const SYSID_NOISE_VARIANCE: f64 = 0.2;
pub const SYSID_DEFAULT_PERIOD: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct SysIdSignal {
    pub input: Vec<f64>,
    pub clean: Vec<f64>,
    pub noisy: Vec<f64>,
    pub noise_variance: f64,
}

impl SysIdSignal {
    /// Scalar-input training set on the noisy plant output.
    pub fn train_set(&self) -> Result<Dataset> {
        Dataset::regression(self.input_matrix()?, &self.noisy)
    }

    /// Scalar-input evaluation set on the clean plant output.
    pub fn test_set(&self) -> Result<Dataset> {
        Dataset::regression(self.input_matrix()?, &self.clean)
    }

    fn input_matrix(&self) -> Result<Matrix> {
        Matrix::from_col_major(1, self.input.len(), self.input.clone())
    }
}

/// `y_t = 2u_t − 0.5u_{t−1} − 0.1u_{t−2} − 0.7(cos(3u_t) + e^{−|u_t|})`,
/// with `u` taken as zero before the first sample.
pub fn plant_response(u: &[f64]) -> Vec<f64> {
    let at = |t: isize| if t < 0 { 0.0 } else { u[t as usize] };
    (0..u.len() as isize)
        .map(|t| {
            let ut = at(t);
            2.0 * ut - 0.5 * at(t - 1) - 0.1 * at(t - 2) - 0.7 * (libm::cos(3.0 * ut) + libm::exp(-libm::fabs(ut)))
        })
        .collect()
}

/// Unit-amplitude, 50% duty square wave: `+1` for the first half of each
/// period, `−1` for the second.
pub fn square_wave(len: usize, period: usize) -> Result<Vec<f64>> {
    if period < 2 || !period.is_multiple_of(2) {
        return Err(Error::InvalidParameter { name: "period", reason: "must be even and >= 2" });
    }
    Ok((0..len).map(|t| if t % period < period / 2 { 1.0 } else { -1.0 }).collect())
}

/// 400-sample square-wave excitation, the clean plant response, and a copy
/// with seed-derived zero-mean Gaussian noise of variance 0.2.
pub fn gen_sysid(seed: u64, period: usize) -> Result<SysIdSignal> {
    sysid_from_input(square_wave(SYSID_LENGTH, period)?, seed)
}

pub fn sysid_from_input(input: Vec<f64>, seed: u64) -> Result<SysIdSignal> {
    let clean = plant_response(&input);
    let normal = Normal::new(0.0, libm::sqrt(SYSID_NOISE_VARIANCE))
        .map_err(|_| Error::InvalidParameter { name: "noise", reason: "bad variance" })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = clean.iter().map(|y| y + normal.sample(&mut rng)).collect();
    Ok(SysIdSignal { input, clean, noisy, noise_variance: SYSID_NOISE_VARIANCE })
}

/// The two scalar center lists for the system identification task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SysIdCenters {
    /// `{−100, −50, 0, 50, 100}`
    Symmetric,
    /// `{−100, −50, 0, 50, −100}`, as printed.
    PaperLiteral,
}

impl SysIdCenters {
    pub fn values(&self) -> [f64; 5] {
        match self {
            SysIdCenters::Symmetric => [-100.0, -50.0, 0.0, 50.0, 100.0],
            SysIdCenters::PaperLiteral => [-100.0, -50.0, 0.0, 50.0, -100.0],
        }
    }

    pub fn matrix(&self) -> Matrix {
        let v = self.values();
        Matrix::from_col_major(1, v.len(), vec![v[0], v[1], v[2], v[3], v[4]]).expect("five scalars")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_iris() -> (Matrix, Vec<usize>) {
        let labels: Vec<usize> = (0..150).map(|i| i / 50).collect();
        let data: Vec<f64> = (0..600).map(|i| i as f64).collect();
        (Matrix::from_col_major(4, 150, data).unwrap(), labels)
    }

    #[test]
    fn iris_split_sizes_and_partition() {
        let (x, y) = fake_iris();
        let (tr, te) = iris_split(&x, &y, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (120, 30));
        for c in 0..3 {
            assert_eq!(tr.labels.as_ref().unwrap().iter().filter(|&&l| l == c).count(), 40);
            assert_eq!(te.labels.as_ref().unwrap().iter().filter(|&&l| l == c).count(), 10);
        }
        // features encode the original index: col j holds 4j..4j+3
        let mut seen: Vec<usize> = tr.inputs.columns().chain(te.inputs.columns()).map(|c| c[0] as usize / 4).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..150).collect::<Vec<_>>());
        // one-hot targets
        assert_eq!(tr.targets.rows(), 3);
        assert_eq!(tr.targets.col(0).iter().sum::<f64>(), 1.0);
        // training order mixes classes, test order is ascending
        let first = &tr.labels.as_ref().unwrap()[..40];
        assert!(first.iter().any(|&l| l != first[0]));
        let test_pos: Vec<f64> = te.inputs.columns().map(|c| c[0]).collect();
        assert!(test_pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn iris_split_deterministic_per_seed() {
        let (x, y) = fake_iris();
        assert_eq!(iris_split(&x, &y, 9).unwrap(), iris_split(&x, &y, 9).unwrap());
        for s in 0..10u64 {
            assert_ne!(iris_split(&x, &y, s).unwrap().1, iris_split(&x, &y, s + 100).unwrap().1);
        }
    }

    #[test]
    fn iris_split_rejects_wrong_counts() {
        let labels: Vec<usize> = (0..150).map(|i| if i < 60 { 0 } else { i / 50 }).collect();
        let (x, _) = fake_iris();
        assert!(iris_split(&x, &labels, 0).is_err());
    }

    #[test]
    fn function_approx_grids() {
        let (tr, te) = gen_function_approx(FunApproxTarget::default()).unwrap();
        assert_eq!(tr.len(), 121);
        assert_eq!(te.len(), 100);
        let origin = tr.inputs.columns().position(|c| c[0].abs() < 1e-12 && c[1].abs() < 1e-12).unwrap();
        assert!((tr.targets.get(0, origin) - 1.0).abs() < 1e-12);
        // exact lattice: every coordinate is lo + i·0.2 for integer i
        for c in tr.inputs.columns() {
            for v in c {
                let i = ((v + 1.0) / 0.2).round();
                assert_eq!(*v, -1.0 + i * 0.2);
            }
        }
    }

    #[test]
    fn plant_constant_inputs() {
        let y = plant_response(&[1.0; 6]);
        let expect = 2.0 - 0.5 - 0.1 - 0.7 * (libm::cos(3.0) + libm::exp(-1.0));
        for v in &y[2..] {
            assert!((v - expect).abs() < 1e-15);
        }
        // zero-padded history at t = 0
        assert!((y[0] - (2.0 - 0.7 * (libm::cos(3.0) + libm::exp(-1.0)))).abs() < 1e-15);
        assert!(plant_response(&[0.0; 5]).iter().all(|v| (v + 1.4).abs() < 1e-15));
    }

    #[test]
    fn square_wave_shape() {
        let u = square_wave(400, 40).unwrap();
        assert_eq!(u.len(), 400);
        assert_eq!(u.iter().filter(|&&v| v == 1.0).count(), 200);
        assert_eq!(&u[18..22], &[1.0, 1.0, -1.0, -1.0]);
        assert!(square_wave(10, 3).is_err());
    }

    #[test]
    fn sysid_noise_variance() {
        for seed in 0..5 {
            let s = gen_sysid(seed, SYSID_DEFAULT_PERIOD).unwrap();
            assert_eq!(s.clean, plant_response(&s.input));
            let r: Vec<f64> = s.noisy.iter().zip(&s.clean).map(|(a, b)| a - b).collect();
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r.len() - 1) as f64;
            assert!((0.15..=0.25).contains(&var), "variance {var}");
        }
    }

    #[test]
    fn sysid_center_variants() {
        assert_eq!(SysIdCenters::PaperLiteral.values(), [-100.0, -50.0, 0.0, 50.0, -100.0]);
        assert_eq!(SysIdCenters::Symmetric.matrix().cols(), 5);
    }
}
