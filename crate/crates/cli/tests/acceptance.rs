//! Exit criteria. Prints one verdict line per criterion and exits non-zero
//! if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use corbf_cli::experiment::{run_experiment, ExperimentConfig, Task};
use corbf_cli::report::{self, load_artifacts, Artifacts, CriterionResult, Verdict};
use corbf_core::kernel::{cosine_kernel, gaussian_kernel};
use corbf_core::metrics::{confusion, sensitivity_specificity_youden};
use corbf_core::scenario::{discriminative_power, Scenario4Center};
use corbf_core::trainer::{learning_rate_bound, sgd_step_with_alpha_rate};
use corbf_core::{
    fit, CosineParams, Dataset, Error, FusionMode, GaussianParams, KernelBank, Matrix, OutputHead, RbfModel,
    TrainConfig, WeightInit,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const GRADIENT_PAIRS: usize = 1000;
const GRADIENT_REL_TOL: f64 = 1e-6;
const FORWARD_CASES: usize = 10_000;
const FORWARD_TOL: f64 = 1e-12;
const SCENARIO_TOL: f64 = 1e-9;
const SCENARIO_MIN_CO_POWER: f64 = 1e-3;
const CONVERGED_DIST: f64 = 1e-3;
const DIVERGENCE_EPOCHS: usize = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn from_report(r: &CriterionResult) -> Outcome {
    outcome(r.verdict == Verdict::Pass, r.detail.clone())
}

fn random_model(rng: &mut ChaCha8Rng, mode: usize) -> RbfModel {
    let a = rng.random_range(1..5);
    let k = rng.random_range(1..7);
    let centers = Matrix::from_col_major(a, k, (0..a * k).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap();
    let bank =
        KernelBank::new(centers, GaussianParams::new(rng.random_range(0.5..2.0)).unwrap(), CosineParams::default())
            .unwrap();
    let ag: f64 = rng.random_range(0.0..1.0);
    let mode = match mode {
        0 => FusionMode::Fixed { alpha: vec![ag, 1.0 - ag] },
        1 => FusionMode::Adaptive { alpha: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)] },
        _ => FusionMode::Co,
    };
    let w = (0..mode.weight_len(k, 2)).map(|_| rng.random_range(-1.0..1.0)).collect();
    RbfModel::single(bank, OutputHead::new(mode, w, rng.random_range(-1.0..1.0))).unwrap()
}

/// Output as the explicit sum over centers and kernels.
fn double_sum(m: &RbfModel, x: &[f64]) -> f64 {
    let bank = m.bank();
    let head = &m.heads()[0];
    let k_count = bank.num_centers();
    let mut y = head.bias();
    for k in 0..k_count {
        let c = bank.centers().col(k);
        let phi = [gaussian_kernel(x, c, bank.gaussian()).unwrap(), cosine_kernel(x, c, bank.cosine()).unwrap()];
        for (l, p) in phi.iter().enumerate() {
            let w = match head.mode() {
                FusionMode::Co => head.weights()[l * k_count + k],
                FusionMode::Fixed { alpha } | FusionMode::Adaptive { alpha } => head.weights()[k] * alpha[l],
            };
            y += w * p;
        }
    }
    y
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (h, eta) = (1e-6, 1e-2);
    let mut worst: f64 = 0.0;
    let mut params = 0;
    for mode in 0..3 {
        for _ in 0..GRADIENT_PAIRS {
            let model = random_model(&mut rng, mode);
            let x: Vec<f64> = (0..model.bank().input_dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
            let d: f64 = rng.random_range(-2.0..2.0);
            let cost = |theta: &[f64]| {
                let mut m = model.clone();
                m.heads_mut()[0].set_parameters(theta).unwrap();
                let e = d - double_sum(&m, &x);
                0.5 * e * e
            };
            let theta = model.heads()[0].parameters();
            let fd: Vec<f64> = (0..theta.len())
                .map(|i| {
                    let (mut plus, mut minus) = (theta.clone(), theta.clone());
                    plus[i] += h;
                    minus[i] -= h;
                    (cost(&plus) - cost(&minus)) / (2.0 * h)
                })
                .collect();
            let mut stepped = model.clone();
            sgd_step_with_alpha_rate(&mut stepped, &x, d, eta, eta).unwrap();
            let after = stepped.heads()[0].parameters();
            let scale = fd.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if scale < 1e-9 {
                continue;
            }
            for i in 0..theta.len() {
                let analytic = -(after[i] - theta[i]) / eta;
                worst = worst.max((analytic - fd[i]).abs() / scale);
                params += 1;
            }
        }
    }
    outcome(
        worst <= GRADIENT_REL_TOL,
        format!("{} pairs per architecture, {params} parameters, worst relative gap {worst:.2e}", GRADIENT_PAIRS),
    )
}

fn forward_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for case in 0..FORWARD_CASES {
        let m = random_model(&mut rng, case % 3);
        let a = m.bank().input_dim();
        let cols = rng.random_range(1..4);
        let x = Matrix::from_col_major(a, cols, (0..a * cols).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let batch = m.forward_batch(&x).unwrap();
        for (j, y) in batch.iter().enumerate() {
            worst = worst.max((y - double_sum(&m, x.col(j))).abs());
        }
    }
    outcome(worst <= FORWARD_TOL, format!("{FORWARD_CASES} models, worst gap {worst:.2e}"))
}

fn scenario() -> Outcome {
    let (g, c) = (GaussianParams::new(1.5).unwrap(), CosineParams::default());
    let s = Scenario4Center::construct(c).unwrap();
    let r = s.residuals(c).unwrap();
    let bank = s.bank(g, c).unwrap();
    let (a, b) = Scenario4Center::partition();
    let psi = |head: OutputHead| {
        let m = RbfModel::single(bank.clone(), head).unwrap();
        discriminative_power(&m, 0, &s.test_point, &a, &b).unwrap()
    };
    let psi_g = psi(OutputHead::new(FusionMode::Fixed { alpha: vec![1.0, 0.0] }, vec![1.0; 4], 0.0));
    let psi_c = psi(OutputHead::new(FusionMode::Fixed { alpha: vec![0.0, 1.0] }, vec![1.0; 4], 0.0));
    let psi_a = psi(OutputHead::new(FusionMode::Adaptive { alpha: vec![0.62, 0.38] }, vec![1.0; 4], 0.0));
    let w = Matrix::from_columns(&[[1.0, 0.4, 0.9, 0.2], [0.3, 1.1, 0.5, 0.8]]).unwrap();
    let psi_r = psi(OutputHead::co(&w, 0.0));
    let pass = r.within(SCENARIO_TOL)
        && [psi_g, psi_c, psi_a].iter().all(|p| p.abs() <= SCENARIO_TOL)
        && psi_r.abs() > SCENARIO_MIN_CO_POWER;
    outcome(
        pass,
        format!("geometry residuals {r:?}; psi gaussian {psi_g:.1e}, cosine {psi_c:.1e}, fused {psi_a:.1e}, per-kernel {psi_r:.4}"),
    )
}

fn realizable_task() -> (KernelBank, Vec<f64>, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let centers = Matrix::from_columns(&[[-1.0, 0.5, 0.3], [1.0, 1.0, -0.4], [0.2, -1.2, 0.9]]).unwrap();
    let bank = KernelBank::new(centers, GaussianParams::new(1.0).unwrap(), CosineParams::default()).unwrap();
    let w_star: Vec<f64> = (0..bank.phi_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cols: Vec<[f64; 3]> = (0..80)
        .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let d: Vec<f64> =
        cols.iter().map(|c| bank.kernel_vector(c).unwrap().iter().zip(&w_star).map(|(p, w)| p * w).sum()).collect();
    (bank, w_star, Dataset::regression(Matrix::from_columns(&cols).unwrap(), &d).unwrap())
}

fn convergence_bound() -> Outcome {
    let (bank, w_star, data) = realizable_task();
    let bound = learning_rate_bound(&bank.kernel_matrix(&data.inputs).unwrap()).unwrap();
    let mut cfg = TrainConfig::new(0.5 * bound, 4000, 1);
    cfg.init = WeightInit::Zeros;
    let trace = fit(RbfModel::zeros(bank.clone(), FusionMode::Co, 1).unwrap(), &data, &cfg, None).unwrap();
    let head = &trace.model.heads()[0];
    let w: Vec<f64> = std::iter::once(head.bias()).chain(head.weights().iter().copied()).collect();
    let dist = w.iter().zip(&w_star).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();

    let cfg = TrainConfig { eta: 4.0 * bound, epochs: DIVERGENCE_EPOCHS, ..cfg };
    let (diverged, how) = match fit(RbfModel::zeros(bank, FusionMode::Co, 1).unwrap(), &data, &cfg, None) {
        Err(Error::Divergence { epoch, .. }) => (true, format!("guard tripped in epoch {epoch}")),
        Ok(t) => (t.last().mse > t.epochs[0].mse, format!("MSE {:.3e} -> {:.3e}", t.epochs[0].mse, t.last().mse)),
        Err(e) => (false, e.to_string()),
    };
    outcome(dist < CONVERGED_DIST && diverged, format!("0.5/lambda_max: |w - w*| = {dist:.2e}; 4/lambda_max: {how}"))
}

fn experiment(task: Task, dir: &Path) -> Artifacts {
    let mut cfg = ExperimentConfig::new(task);
    cfg.out = dir.join(task.name());
    run_experiment(&cfg).unwrap_or_else(|e| panic!("{task} experiment: {e}"));
    load_artifacts(&cfg.out).unwrap()
}

fn corollary_ordering(sets: &[&Artifacts]) -> Outcome {
    let results: Vec<CriterionResult> = sets.iter().map(|a| report::co_not_worse_than_adaptive(a)).collect();
    let pass = results.iter().all(|r| r.verdict == Verdict::Pass);
    let detail = results.iter().map(|r| format!("{} {}", r.verdict, r.detail)).collect::<Vec<_>>().join("; ");
    outcome(pass, detail)
}

fn metric_tables(iris: &Artifacts) -> Outcome {
    let truth = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2];
    let pred = [0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 0];
    // (sensitivity, specificity) per class, counted by hand
    let hand = [(1.0, 7.0 / 8.0), (3.0 / 4.0, 1.0), (3.0 / 4.0, 7.0 / 8.0)];
    let cc = confusion(&pred, &truth, 3).unwrap();
    let rates = sensitivity_specificity_youden(&cc);
    let fixture = cc.accuracy() == 10.0 / 12.0
        && rates.iter().zip(hand).all(|(r, (se, sp))| {
            r.sensitivity == Some(se) && r.specificity == Some(sp) && r.youden == Some(se + sp - 1.0)
        });
    let rows = report::youden_rows(iris);
    outcome(
        fixture && rows.verdict == Verdict::Pass,
        format!("fixture {}; emitted tables: {}", if fixture { "matches" } else { "differs" }, rows.detail),
    )
}

fn determinism() -> Outcome {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_corbf"))
            .args(["run", "iris", "--runs", "2", "--epochs", "50", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let (a, b) = (run("first"), run("second"));
    let mut compared = 0;
    let mut differing = Vec::new();
    for sub in ["", "runs"] {
        for entry in std::fs::read_dir(a.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "csv") {
                let name = path.file_name().unwrap();
                if std::fs::read(&path).unwrap() != std::fs::read(b.join(sub).join(name)).unwrap() {
                    differing.push(name.to_string_lossy().into_owned());
                }
                compared += 1;
            }
        }
    }
    outcome(compared > 0 && differing.is_empty(), format!("{compared} CSV files compared, differing: {differing:?}"))
}

fn main() -> ExitCode {
    let tmp = TempDir::new().unwrap();
    let mut failed = 0;
    let mut report = |id: u8, title: &str, o: Outcome| {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] criterion {id}: {title} ({})", o.detail);
        failed += usize::from(!o.pass);
    };

    report(1, "finite-difference gradients, all architectures", gradient_check());
    report(2, "matrix forward pass equals explicit double sum", forward_oracle());
    report(3, "four-center discriminative power", scenario());
    report(4, "step size inside the eigenvalue bound converges, far outside diverges", convergence_bound());

    let iris = experiment(Task::Iris, tmp.path());
    let funapprox = experiment(Task::Funapprox, tmp.path());
    let sysid = experiment(Task::Sysid, tmp.path());

    report(5, "Iris test accuracy", from_report(&report::iris_accuracy(&iris)));
    report(6, "Iris training MSE level and speed", from_report(&report::iris_mse(&iris)));
    report(7, "co final training MSE <= adaptive on every task", corollary_ordering(&[&iris, &funapprox, &sysid]));
    report(8, "function approximation ranking and test error band", from_report(&report::funapprox(&funapprox)));
    report(9, "system identification convergence order and agreement", from_report(&report::sysid(&sysid)));
    report(10, "confusion, sensitivity, specificity and Youden tables", metric_tables(&iris));
    report(11, "repeated runs give byte-identical CSVs", determinism());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 11 criteria failed");
        ExitCode::FAILURE
    }
}
