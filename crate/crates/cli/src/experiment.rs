//! Multi-seed benchmark runs of the three tasks across the fusion
//! architectures, and the artifacts they leave behind.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use corbf_core::centers::{subtractive_clustering, SubtractiveConfig};
use corbf_core::metrics::{class_rates, confusion, error_surface, to_db, ErrorSurface};
use corbf_core::stats::{aggregate, RunMetrics};
use corbf_core::tasks::{
    funapprox_axis, gen_function_approx, gen_sysid, iris_split, FunApproxTarget, SysIdCenters, SysIdSignal,
    FUNAPPROX_TEST_AXIS, FUNAPPROX_TRAIN_AXIS, IRIS_CLASSES, SYSID_DEFAULT_PERIOD,
};
use corbf_core::{
    fit, multiclass_decision, CosineParams, Dataset, FusionMode, GaussianParams, KernelBank, RbfModel, TrainConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_iris, IrisTable, DATA_ENV};
use crate::error::{CliError, Result};
use crate::format::{
    write_curve, write_json, write_model, write_signal, write_summary, write_surface, write_table, CurveRow,
    SummaryRow, TableRow,
};

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.csv";
pub const RUNS_DIR: &str = "runs";
pub const MANIFEST_VERSION: u32 = 1;

/// Epoch budget for system identification. The task settles within a few
/// hundred epochs at its default step size.
pub const SYSID_DEFAULT_EPOCHS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Iris,
    Funapprox,
    Sysid,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Iris => "iris",
            Task::Funapprox => "funapprox",
            Task::Sysid => "sysid",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    /// Fixed fusion, `α = (0.5, 0.5)`.
    Manual,
    /// Global fusion coefficients learned alongside the weights.
    Adaptive,
    /// One weight per (center, kernel) pair.
    Co,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Manual, Arch::Adaptive, Arch::Co];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Manual => "manual",
            Arch::Adaptive => "adaptive",
            Arch::Co => "co",
        }
    }

    pub fn mode(self) -> FusionMode {
        match self {
            Arch::Manual => FusionMode::fixed_uniform(2),
            Arch::Adaptive => FusionMode::adaptive_uniform(2),
            Arch::Co => FusionMode::Co,
        }
    }

    /// Trained model of the first completed run.
    pub fn model_file(self) -> String {
        format!("{}_model.json", self.name())
    }

    pub fn curve_file(self) -> String {
        format!("{}_curve.csv", self.name())
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub archs: Vec<Arch>,
    pub runs: usize,
    /// Root seed; run `i` uses `seed + i`.
    pub seed: u64,
    /// Worker threads. Results do not depend on it.
    pub jobs: usize,
    pub out: PathBuf,
    /// Step size, epoch budget and init. The seed field is replaced per run.
    pub train: TrainConfig,
    pub sigma: f64,
    pub iris_influence: f64,
    pub iris_neurons: usize,
    pub funapprox_target: FunApproxTarget,
    pub sysid_centers: SysIdCenters,
    pub sysid_period: usize,
}

impl ExperimentConfig {
    /// Published settings for `task`, 20 runs, root seed 0.
    pub fn new(task: Task) -> Self {
        let (eta, epochs, sigma) = match task {
            Task::Iris => (5e-3, 2000, 1.0),
            Task::Funapprox => (1e-3, 2000, 1.0),
            Task::Sysid => (1e-4, SYSID_DEFAULT_EPOCHS, 0.5),
        };
        Self {
            task,
            archs: Arch::ALL.to_vec(),
            runs: 20,
            seed: 0,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out: PathBuf::from("results").join(task.name()),
            train: TrainConfig::new(eta, epochs, 0),
            sigma,
            iris_influence: 0.2,
            iris_neurons: 16,
            funapprox_target: FunApproxTarget::default(),
            sysid_centers: SysIdCenters::Symmetric,
            sysid_period: SYSID_DEFAULT_PERIOD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.archs.is_empty() {
            return bad("at least one architecture is required");
        }
        let mut seen = self.archs.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.archs.len() {
            return bad("architecture listed twice");
        }
        if self.runs == 0 {
            return bad("runs must be >= 1");
        }
        if self.jobs == 0 {
            return bad("jobs must be >= 1");
        }
        if self.seed.checked_add(self.runs as u64 - 1).is_none() {
            return bad("seed + runs overflows");
        }
        self.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        GaussianParams::new(self.sigma).map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.iris_influence > 0.0 && self.iris_influence.is_finite()) {
            return bad("influence radius must be finite and > 0");
        }
        if self.iris_neurons == 0 {
            return bad("neuron count must be >= 1");
        }
        if !(self.funapprox_target.c1.is_finite() && self.funapprox_target.c2.is_finite()) {
            return bad("target coefficients must be finite");
        }
        if self.sysid_period < 2 || !self.sysid_period.is_multiple_of(2) {
            return bad("square-wave period must be even and >= 2");
        }
        Ok(())
    }

    pub fn run_seed(&self, index: usize) -> u64 {
        self.seed + index as u64
    }
}

/// Datasets and kernel bank for one run.
#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub bank: KernelBank,
    pub train: Dataset,
    pub test: Dataset,
    pub outputs: usize,
    /// Number of centers subtractive clustering found before truncation.
    pub clustered: Option<usize>,
    pub signal: Option<SysIdSignal>,
}

/// Builds the task for the run seeded with `seed`. `iris` is required for
/// the Iris task.
pub fn build_task(cfg: &ExperimentConfig, seed: u64, iris: Option<&IrisTable>) -> Result<TaskInstance> {
    let gaussian = GaussianParams::new(cfg.sigma)?;
    let cosine = CosineParams::default();
    Ok(match cfg.task {
        Task::Iris => {
            let table = iris.ok_or_else(|| CliError::Config("iris data not loaded".into()))?;
            let (train, test) = iris_split(&table.features, &table.labels, seed)?;
            let found = subtractive_clustering(&train.inputs, &SubtractiveConfig::with_influence(cfg.iris_influence))?;
            let keep: Vec<usize> = (0..found.indices.len().min(cfg.iris_neurons)).collect();
            let bank = KernelBank::new(found.centers.select_columns(&keep), gaussian, cosine)?;
            TaskInstance {
                bank,
                train,
                test,
                outputs: IRIS_CLASSES.len(),
                clustered: Some(found.indices.len()),
                signal: None,
            }
        }
        Task::Funapprox => {
            let (train, test) = gen_function_approx(cfg.funapprox_target)?;
            let bank = KernelBank::new(train.inputs.clone(), gaussian, cosine)?;
            TaskInstance { bank, train, test, outputs: 1, clustered: None, signal: None }
        }
        Task::Sysid => {
            let signal = gen_sysid(seed, cfg.sysid_period)?;
            let bank = KernelBank::new(cfg.sysid_centers.matrix(), gaussian, cosine)?;
            TaskInstance {
                bank,
                train: signal.train_set()?,
                test: signal.test_set()?,
                outputs: 1,
                clustered: None,
                signal: Some(signal),
            }
        }
    })
}

/// Everything one (architecture, seed) run produced.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub curve: Vec<CurveRow>,
    pub metrics: RunMetrics,
    pub clustered: Option<usize>,
    /// Train and test error surfaces (function approximation).
    pub surfaces: Option<(ErrorSurface, ErrorSurface)>,
    /// Input, clean output and prediction (system identification).
    pub signal: Option<[Vec<f64>; 3]>,
    pub model: RbfModel,
}

pub fn run_one(cfg: &ExperimentConfig, arch: Arch, seed: u64, iris: Option<&IrisTable>) -> Result<RunRecord> {
    let task = build_task(cfg, seed, iris)?;
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = seed;
    let model = train_cfg.initial_model(task.bank.clone(), arch.mode(), task.outputs)?;
    let trace = fit(model, &task.train, &train_cfg, Some(&task.test))?;
    let last = trace.last();

    let mut metrics = RunMetrics::new();
    let mut put = |k: &str, v: Option<f64>| {
        metrics.insert(k.to_string(), v);
    };
    put("final_mse", Some(last.mse));
    put("final_mse_db", Some(last.mse_db));
    put("test_mse_db", last.test_mse.map(to_db));

    let mut surfaces = None;
    let mut signal = None;
    match cfg.task {
        Task::Iris => {
            for (phase, data) in [("train", &task.train), ("test", &task.test)] {
                let labels = data.labels.as_deref().unwrap_or_default();
                let pred = predict_classes(&trace.model, data)?;
                let cc = confusion(&pred, labels, task.outputs)?;
                put(&format!("{phase}_acc"), Some(100.0 * cc.accuracy()));
                for (c, counts) in cc.classes.iter().enumerate() {
                    let r = class_rates(counts);
                    let class = IRIS_CLASSES[c];
                    put(&format!("sensitivity/{phase}/{class}"), r.sensitivity.map(|v| 100.0 * v));
                    put(&format!("specificity/{phase}/{class}"), r.specificity.map(|v| 100.0 * v));
                    put(&format!("youden/{phase}/{class}"), r.youden);
                }
            }
        }
        Task::Funapprox => {
            let target = cfg.funapprox_target;
            let f = |x1: f64, x2: f64| target.eval(x1, x2);
            let train_axis = funapprox_axis(FUNAPPROX_TRAIN_AXIS);
            let test_axis = funapprox_axis(FUNAPPROX_TEST_AXIS);
            let tr = error_surface(&trace.model, &train_axis, &train_axis, f)?;
            let te = error_surface(&trace.model, &test_axis, &test_axis, f)?;
            put("train_err_max_abs", Some(tr.max_abs()));
            put("test_err_min", te.errors.iter().copied().reduce(f64::min));
            put("test_err_max", te.errors.iter().copied().reduce(f64::max));
            put("test_err_max_abs", Some(te.max_abs()));
            surfaces = Some((tr, te));
        }
        Task::Sysid => {
            let s = task.signal.as_ref().expect("sysid task carries its signal");
            let predicted = trace.model.forward_batch(&task.test.inputs)?;
            signal = Some([s.input.clone(), s.clean.clone(), predicted]);
        }
    }

    Ok(RunRecord {
        curve: trace.epochs.iter().map(CurveRow::from).collect(),
        metrics,
        clustered: task.clustered,
        surfaces,
        signal,
        model: trace.model,
    })
}

fn predict_classes(model: &RbfModel, data: &Dataset) -> Result<Vec<usize>> {
    let mut out = vec![0.0; model.num_outputs()];
    (0..data.len())
        .map(|s| {
            let phi = model.bank().kernel_vector(data.inputs.col(s))?;
            model.outputs_from_phi(&phi, &mut out)?;
            Ok(multiclass_decision(&out)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergedRun {
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchStatus {
    pub architecture: Arch,
    pub completed: usize,
    pub diverged: Vec<DivergedRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub library_version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub data_source: Option<String>,
    pub architectures: Vec<ArchStatus>,
    /// Centers found by subtractive clustering in each run, before
    /// truncation to the configured neuron count.
    pub clustered_centers: Option<Vec<usize>>,
    pub wall_clock_secs: f64,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            origin: path.display().to_string(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    }

    pub fn status(&self, arch: Arch) -> Option<&ArchStatus> {
        self.architectures.iter().find(|a| a.architecture == arch)
    }
}

fn notes(cfg: &ExperimentConfig) -> Vec<String> {
    let mut notes = vec![
        format!("run i uses seed {} + i for initialization and task randomness", cfg.seed),
        "adaptive fusion coefficients start at 0.5/0.5 and are not projected after updates".into(),
        "curve mse_db is 10*log10 of the run-mean linear MSE; summary dB values are per-run means".into(),
        format!("samples presented in dataset order: shuffle = {}", cfg.train.shuffle),
    ];
    match cfg.task {
        Task::Iris => notes.extend([
            "train/test split re-drawn in every run from the run seed (40/10 per class)".into(),
            format!(
                "subtractive clustering at influence {} on the training split; first {} centers kept",
                cfg.iris_influence, cfg.iris_neurons
            ),
            "one output per class with one-hot targets; decision by argmax".into(),
        ]),
        Task::Funapprox => {
            let t = cfg.funapprox_target;
            let name = if t == FunApproxTarget::EXP_X1SQ_MINUS_X2SQ { "exp-x1sq-minus-x2sq" } else { "custom" };
            notes.push(format!("target {name}: exp({}*x1^2 + {}*x2^2)", t.c1, t.c2));
            notes.push("all 121 training grid points used as centers".into());
        }
        Task::Sysid => notes.extend([
            format!("centers {:?}: {:?}", cfg.sysid_centers, cfg.sysid_centers.values()),
            "network input is the scalar u(t); input history enters only through the plant".into(),
            format!("square-wave period {} samples", cfg.sysid_period),
            "trained on the noisy output, evaluated on the clean output".into(),
        ]),
    }
    notes
}

/// Runs every (architecture, run) pair, writes all artifacts into
/// `cfg.out`, and returns the manifest. Fails with
/// [`CliError::AllDiverged`] after writing the manifest if no run completed.
type RunOutcome = std::result::Result<RunRecord, corbf_core::Error>;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let started = Instant::now();
    let iris = match cfg.task {
        Task::Iris => Some(load_iris()?),
        _ => None,
    };
    let data_source = iris.as_ref().map(|_| std::env::var(DATA_ENV).unwrap_or_else(|_| "vendored iris.csv".into()));

    let pairs: Vec<(Arch, usize)> = cfg.archs.iter().flat_map(|&a| (0..cfg.runs).map(move |i| (a, i))).collect();
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Result<RunRecord>> = pool
        .install(|| pairs.par_iter().map(|&(arch, i)| run_one(cfg, arch, cfg.run_seed(i), iris.as_ref())).collect());

    let out = &cfg.out;
    let runs_dir = out.join(RUNS_DIR);
    std::fs::create_dir_all(&runs_dir).map_err(CliError::io(&runs_dir))?;

    let mut by_arch: BTreeMap<Arch, Vec<(usize, RunOutcome)>> = BTreeMap::new();
    for (&(arch, i), result) in pairs.iter().zip(results) {
        let outcome = match result {
            Ok(r) => Ok(r),
            Err(CliError::Core(e @ corbf_core::Error::Divergence { .. })) => Err(e),
            Err(e) => return Err(e),
        };
        by_arch.entry(arch).or_default().push((i, outcome));
    }

    let mut statuses = Vec::new();
    let mut summary = Vec::new();
    let mut tables: BTreeMap<&str, Vec<TableRow>> = BTreeMap::new();
    let mut clustered = None;
    for &arch in &cfg.archs {
        let runs = &by_arch[&arch];
        let mut diverged = Vec::new();
        let mut done = Vec::new();
        for (i, outcome) in runs {
            match outcome {
                Ok(r) => {
                    let path = runs_dir.join(format!("{}_{:03}.csv", arch.name(), i));
                    write_curve(&path, &r.curve)?;
                    done.push((*i, r));
                }
                Err(e) => diverged.push(DivergedRun { index: *i, seed: cfg.run_seed(*i), error: e.to_string() }),
            }
        }
        if clustered.is_none() && cfg.task == Task::Iris {
            clustered =
                Some(runs.iter().filter_map(|(_, o)| o.as_ref().ok().and_then(|r| r.clustered)).collect::<Vec<_>>());
        }

        if let Some(&(_, first)) = done.first() {
            write_curve(&out.join(arch.curve_file()), &mean_curve(&done.iter().map(|(_, r)| *r).collect::<Vec<_>>()))?;
            if let Some((tr, te)) = &first.surfaces {
                write_surface(&out.join(format!("{}_surface_train.csv", arch.name())), tr)?;
                write_surface(&out.join(format!("{}_surface_test.csv", arch.name())), te)?;
            }
            write_model(&out.join(arch.model_file()), &first.model)?;
            if let Some([u, actual, predicted]) = &first.signal {
                write_signal(&out.join(format!("{}_sysid_trace.csv", arch.name())), u, actual, predicted)?;
            }
        }

        let outcomes: Vec<_> = runs
            .iter()
            .map(|(i, o)| (cfg.run_seed(*i), o.as_ref().map(|r| r.metrics.clone()).map_err(Clone::clone)))
            .collect();
        let agg = aggregate(&outcomes)?;
        let names: Vec<&String> = done.first().map(|(_, r)| r.metrics.keys().collect()).unwrap_or_default();
        for name in names {
            let s = agg.metrics.get(name);
            summary.push(SummaryRow {
                architecture: arch.name().into(),
                metric: name.clone(),
                mean: s.map(|s| s.mean),
                std: s.map(|s| s.std),
                min: s.map(|s| s.min),
                max: s.map(|s| s.max),
                n: s.map_or(0, |s| s.n),
            });
            if let Some((table, phase, class)) = table_slot(name) {
                tables.entry(table).or_default().push(TableRow {
                    architecture: arch.name().into(),
                    phase: phase.into(),
                    class: class.into(),
                    mean: s.map(|s| s.mean),
                    std: s.map(|s| s.std),
                });
            }
        }
        statuses.push(ArchStatus { architecture: arch, completed: done.len(), diverged });
    }

    write_summary(&out.join(SUMMARY), &summary)?;
    for (table, rows) in &tables {
        let decimals = if *table == "youden" { 4 } else { 2 };
        write_table(&out.join(format!("{table}.csv")), rows, decimals)?;
    }

    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        library_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        seeds: (0..cfg.runs).map(|i| cfg.run_seed(i)).collect(),
        data_source,
        architectures: statuses,
        clustered_centers: clustered,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        notes: notes(cfg),
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    if manifest.architectures.iter().all(|a| a.completed == 0) {
        return Err(CliError::AllDiverged(cfg.runs * cfg.archs.len()));
    }
    Ok(manifest)
}

/// Maps a per-run metric name onto (table, phase, class).
fn table_slot(metric: &str) -> Option<(&'static str, &'static str, &str)> {
    let phase = |p: &str| match p {
        "train" => Some("training"),
        "test" => Some("testing"),
        _ => None,
    };
    match metric {
        "train_acc" => Some(("accuracy", "training", "all")),
        "test_acc" => Some(("accuracy", "testing", "all")),
        _ => {
            let mut parts = metric.splitn(3, '/');
            let table = match parts.next()? {
                "sensitivity" => "sensitivity",
                "specificity" => "specificity",
                "youden" => "youden",
                _ => return None,
            };
            Some((table, phase(parts.next()?)?, parts.next()?))
        }
    }
}

/// Epoch-wise mean over runs. Accuracy cells are `None` unless every run
/// has them.
pub fn mean_curve(runs: &[&RunRecord]) -> Vec<CurveRow> {
    let n = runs.len() as f64;
    let epochs = runs.first().map_or(0, |r| r.curve.len());
    let mean_opt = |cells: Vec<Option<f64>>| -> Option<f64> { cells.into_iter().sum::<Option<f64>>().map(|s| s / n) };
    (0..epochs)
        .map(|e| {
            let rows: Vec<&CurveRow> = runs.iter().map(|r| &r.curve[e]).collect();
            let mse = rows.iter().map(|r| r.mse_linear).sum::<f64>() / n;
            CurveRow {
                epoch: rows[0].epoch,
                mse_linear: mse,
                mse_db: to_db(mse),
                train_acc: mean_opt(rows.iter().map(|r| r.train_acc).collect()),
                test_acc: mean_opt(rows.iter().map(|r| r.test_acc).collect()),
            }
        })
        .collect()
}
