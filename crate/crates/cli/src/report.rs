//! Side-by-side comparison of an experiment directory with the published
//! figures, plus a verdict per acceptance criterion. Reads only.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::experiment::{Arch, Manifest, Task, MANIFEST, SUMMARY};
use crate::format::{read_curve, read_summary, read_table, CurveRow, SummaryRow, TableRow};

/// A published mean (and spread, when given) for one architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub task: Task,
    pub architecture: Arch,
    /// Summary metric, table cell (`table/phase/class`) or `mse_db@epoch`.
    pub metric: &'static str,
    pub mean: f64,
    pub std: Option<f64>,
    pub citation: &'static str,
}

const fn r(
    task: Task,
    architecture: Arch,
    metric: &'static str,
    mean: f64,
    std: Option<f64>,
    citation: &'static str,
) -> Reference {
    Reference { task, architecture, metric, mean, std, citation }
}

use Arch::{Adaptive, Co, Manual};
use Task::{Funapprox, Iris, Sysid};

const T2: &str = "Table 2, classification accuracy (%)";
const T3: &str = "Table 3, sensitivity (%) after 2000 epochs";
const T4: &str = "Table 4, specificity (%) after 2000 epochs";
const T5: &str = "Table 5, Youden index after 2000 epochs";
const IRIS_MSE: &str = "Iris MSE curves: \"-30.17 dB\" at 160 vs 240 epochs, \"-35.39 dB\" vs \"-33.33 dB\" after 2000";
const FA_MSE: &str =
    "Function approximation MSE at 2000 epochs: -36.53 / -20.5 / -39.83 dB (target as printed is exp(x1^2 - x1^2))";
const SI_MSE: &str = "System identification: \"minimum error of 3.48 dB\" (results) vs \"-3.48 dB\" (conclusion)";

pub const REFERENCES: &[Reference] = &[
    r(Iris, Manual, "train_acc", 97.71, Some(0.61), T2),
    r(Iris, Manual, "test_acc", 97.00, Some(1.01), T2),
    r(Iris, Adaptive, "train_acc", 98.59, Some(1.12), T2),
    r(Iris, Adaptive, "test_acc", 98.50, Some(4.68), T2),
    r(Iris, Co, "train_acc", 98.35, Some(0.12), T2),
    r(Iris, Co, "test_acc", 99.13, Some(1.47), T2),
    r(Iris, Co, "mse_db@160", -30.17, None, IRIS_MSE),
    r(Iris, Manual, "mse_db@240", -30.17, None, IRIS_MSE),
    r(Iris, Adaptive, "mse_db@240", -30.17, None, IRIS_MSE),
    r(Iris, Co, "mse_db@2000", -35.39, None, IRIS_MSE),
    r(Iris, Manual, "mse_db@2000", -33.33, None, IRIS_MSE),
    r(Iris, Adaptive, "mse_db@2000", -33.33, None, IRIS_MSE),
    r(Iris, Manual, "sensitivity/train/virginica", 97.10, Some(1.58), T3),
    r(Iris, Manual, "sensitivity/train/versicolor", 96.03, Some(1.24), T3),
    r(Iris, Manual, "sensitivity/train/setosa", 100.0, Some(0.0), T3),
    r(Iris, Manual, "sensitivity/test/virginica", 100.0, Some(0.0), T3),
    r(Iris, Manual, "sensitivity/test/versicolor", 100.0, Some(0.0), T3),
    r(Iris, Manual, "sensitivity/test/setosa", 91.00, Some(3.02), T3),
    r(Iris, Adaptive, "sensitivity/train/virginica", 98.65, Some(1.644), T3),
    r(Iris, Adaptive, "sensitivity/train/versicolor", 97.13, Some(2.11), T3),
    r(Iris, Adaptive, "sensitivity/train/setosa", 100.0, Some(0.0), T3),
    r(Iris, Adaptive, "sensitivity/test/virginica", 100.0, Some(0.0), T3),
    r(Iris, Adaptive, "sensitivity/test/versicolor", 97.40, Some(13.83), T3),
    r(Iris, Adaptive, "sensitivity/test/setosa", 98.10, Some(3.94), T3),
    r(Iris, Co, "sensitivity/train/virginica", 97.55, Some(0.35), T3),
    r(Iris, Co, "sensitivity/train/versicolor", 97.50, Some(0.0), T3),
    r(Iris, Co, "sensitivity/train/setosa", 100.0, Some(0.0), T3),
    r(Iris, Co, "sensitivity/test/virginica", 100.0, Some(0.0), T3),
    r(Iris, Co, "sensitivity/test/versicolor", 100.0, Some(0.0), T3),
    r(Iris, Co, "sensitivity/test/setosa", 97.40, Some(4.41), T3),
    r(Iris, Manual, "specificity/train/virginica", 98.01, Some(0.62), T4),
    r(Iris, Manual, "specificity/train/versicolor", 98.55, Some(0.79), T4),
    r(Iris, Manual, "specificity/train/setosa", 100.0, Some(0.0), T4),
    r(Iris, Manual, "specificity/test/virginica", 100.0, Some(0.0), T4),
    r(Iris, Manual, "specificity/test/versicolor", 95.50, Some(1.51), T4),
    r(Iris, Manual, "specificity/test/setosa", 100.0, Some(0.0), T4),
    r(Iris, Adaptive, "specificity/train/virginica", 98.56, Some(1.06), T4),
    r(Iris, Adaptive, "specificity/train/versicolor", 99.33, Some(0.82), T4),
    r(Iris, Adaptive, "specificity/train/setosa", 100.0, Some(0.0), T4),
    r(Iris, Adaptive, "specificity/test/virginica", 98.70, Some(6.91), T4),
    r(Iris, Adaptive, "specificity/test/versicolor", 99.05, Some(1.97), T4),
    r(Iris, Adaptive, "specificity/test/setosa", 100.0, Some(0.0), T4),
    r(Iris, Co, "specificity/train/virginica", 98.75, Some(0.0), T4),
    r(Iris, Co, "specificity/train/versicolor", 98.78, Some(0.18), T4),
    r(Iris, Co, "specificity/train/setosa", 100.0, Some(0.0), T4),
    r(Iris, Co, "specificity/test/virginica", 100.0, Some(0.0), T4),
    r(Iris, Co, "specificity/test/versicolor", 98.70, Some(2.20), T4),
    r(Iris, Co, "specificity/test/setosa", 100.0, Some(0.0), T4),
    r(Iris, Manual, "youden/train/virginica", 0.9511, None, T5),
    r(Iris, Manual, "youden/train/versicolor", 0.9458, None, T5),
    r(Iris, Manual, "youden/train/setosa", 1.0, None, T5),
    r(Iris, Manual, "youden/test/virginica", 1.0, None, T5),
    r(Iris, Manual, "youden/test/versicolor", 0.9550, None, T5),
    r(Iris, Manual, "youden/test/setosa", 0.9100, None, T5),
    r(Iris, Adaptive, "youden/train/virginica", 0.9721, None, T5),
    r(Iris, Adaptive, "youden/train/versicolor", 0.9646, None, T5),
    r(Iris, Adaptive, "youden/train/setosa", 1.0, None, T5),
    r(Iris, Adaptive, "youden/test/virginica", 0.9870, None, T5),
    r(Iris, Adaptive, "youden/test/versicolor", 0.9745, None, T5),
    r(Iris, Adaptive, "youden/test/setosa", 0.9810, None, T5),
    r(Iris, Co, "youden/train/virginica", 0.9630, None, T5),
    r(Iris, Co, "youden/train/versicolor", 0.9628, None, T5),
    r(Iris, Co, "youden/train/setosa", 1.0, None, T5),
    r(Iris, Co, "youden/test/virginica", 1.0, None, T5),
    r(Iris, Co, "youden/test/versicolor", 0.9870, None, T5),
    r(Iris, Co, "youden/test/setosa", 0.9740, None, T5),
    r(Funapprox, Manual, "mse_db@2000", -36.53, None, FA_MSE),
    r(Funapprox, Adaptive, "mse_db@2000", -20.5, None, FA_MSE),
    r(Funapprox, Co, "mse_db@2000", -39.83, None, FA_MSE),
    r(Sysid, Manual, "mse_db@final", 3.48, None, SI_MSE),
    r(Sysid, Adaptive, "mse_db@final", 3.48, None, SI_MSE),
    r(Sysid, Co, "mse_db@final", 3.48, None, SI_MSE),
];

pub const IRIS_MIN_TEST_ACC: f64 = 96.5;
pub const IRIS_MAX_FINAL_DB: f64 = -31.0;
pub const IRIS_CO_EPOCH: usize = 160;
pub const IRIS_BASELINE_EPOCH: usize = 240;
pub const FUNAPPROX_ERROR_BOUND: f64 = 0.15;
pub const SYSID_SETTLE_DB: f64 = 0.5;
pub const SYSID_AGREE_DB: f64 = 1.0;
/// Rounding slack for Youden checks on tables written at 2 and 4 decimals.
pub const YOUDEN_TABLE_TOL: f64 = 2e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The directory lacks what the criterion needs (task, architectures,
    /// epochs).
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "N/A",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub verdict: Verdict,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, title: &'static str, pass: bool, detail: String) -> Self {
        let verdict = if pass { Verdict::Pass } else { Verdict::Fail };
        Self { id, title, verdict, detail }
    }

    fn na(id: u8, title: &'static str, detail: impl Into<String>) -> Self {
        Self { id, title, verdict: Verdict::NotApplicable, detail: detail.into() }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] criterion {}: {} ({})", self.verdict, self.id, self.title, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub architecture: Arch,
    pub metric: String,
    pub measured: Option<(f64, f64)>,
    pub reference: Reference,
}

/// Everything read back from an experiment directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub manifest: Manifest,
    pub summary: Vec<SummaryRow>,
    pub curves: Vec<(Arch, Vec<CurveRow>)>,
    pub tables: Vec<(String, Vec<TableRow>)>,
}

pub const IRIS_TABLES: [&str; 4] = ["accuracy", "sensitivity", "specificity", "youden"];

/// Files a complete run of `manifest` leaves behind.
pub fn expected_files(manifest: &Manifest) -> Vec<String> {
    let mut files = vec![MANIFEST.to_string(), SUMMARY.to_string()];
    for status in manifest.architectures.iter().filter(|s| s.completed > 0) {
        let a = status.architecture;
        files.push(a.curve_file());
        match manifest.config.task {
            Task::Funapprox => {
                files.push(format!("{a}_surface_train.csv"));
                files.push(format!("{a}_surface_test.csv"));
            }
            Task::Sysid => files.push(format!("{a}_sysid_trace.csv")),
            Task::Iris => {}
        }
    }
    if manifest.config.task == Task::Iris {
        files.extend(IRIS_TABLES.iter().map(|t| format!("{t}.csv")));
    }
    files
}

pub fn load_artifacts(dir: &Path) -> Result<Artifacts> {
    let missing = |names: Vec<String>| CliError::MissingArtifacts { dir: dir.to_path_buf(), missing: names };
    if !dir.join(MANIFEST).is_file() {
        let absent = [MANIFEST, SUMMARY].iter().filter(|f| !dir.join(f).is_file()).map(|f| f.to_string()).collect();
        return Err(missing(absent));
    }
    let manifest = Manifest::load(dir)?;
    let absent: Vec<String> = expected_files(&manifest).into_iter().filter(|f| !dir.join(f).is_file()).collect();
    if !absent.is_empty() {
        return Err(missing(absent));
    }
    let summary = read_summary(&dir.join(SUMMARY))?;
    let curves = manifest
        .architectures
        .iter()
        .filter(|s| s.completed > 0)
        .map(|s| Ok((s.architecture, read_curve(&dir.join(s.architecture.curve_file()))?)))
        .collect::<Result<Vec<_>>>()?;
    let tables = if manifest.config.task == Task::Iris {
        IRIS_TABLES
            .iter()
            .map(|t| Ok((t.to_string(), read_table(&dir.join(format!("{t}.csv")))?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(Artifacts { manifest, summary, curves, tables })
}

impl Artifacts {
    pub fn task(&self) -> Task {
        self.manifest.config.task
    }

    pub fn curve(&self, arch: Arch) -> Option<&[CurveRow]> {
        self.curves.iter().find(|(a, _)| *a == arch).map(|(_, c)| c.as_slice())
    }

    pub fn summary(&self, arch: Arch, metric: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.architecture == arch.name() && r.metric == metric)
    }

    pub fn mean(&self, arch: Arch, metric: &str) -> Option<f64> {
        self.summary(arch, metric).and_then(|r| r.mean)
    }

    pub fn table(&self, name: &str) -> Option<&[TableRow]> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_slice())
    }
}

/// Mean-curve dB value at a 1-based epoch.
pub fn db_at(curve: &[CurveRow], epoch: usize) -> Option<f64> {
    curve.iter().find(|r| r.epoch == epoch).map(|r| r.mse_db)
}

/// First epoch from which the curve stays within `tol_db` of its final value.
pub fn settle_epoch(curve: &[CurveRow], tol_db: f64) -> Option<usize> {
    let last = curve.last()?.mse_db;
    let outside = curve.iter().rposition(|r| (r.mse_db - last).abs() > tol_db);
    Some(outside.map_or(curve[0].epoch, |i| curve[i + 1].epoch))
}

fn measured(a: &Artifacts, arch: Arch, metric: &str) -> Option<(f64, f64)> {
    if let Some((_, at)) = metric.split_once('@') {
        let curve = a.curve(arch)?;
        let db = if at == "final" { curve.last().map(|r| r.mse_db) } else { db_at(curve, at.parse().ok()?) };
        return db.map(|d| (d, f64::NAN));
    }
    let s = a.summary(arch, metric)?;
    Some((s.mean?, s.std.unwrap_or(f64::NAN)))
}

pub fn comparisons(a: &Artifacts) -> Vec<ComparisonRow> {
    REFERENCES
        .iter()
        .filter(|r| r.task == a.task() && a.curve(r.architecture).is_some())
        .map(|r| ComparisonRow {
            architecture: r.architecture,
            metric: r.metric.to_string(),
            measured: measured(a, r.architecture, r.metric),
            reference: *r,
        })
        .collect()
}

/// Verdicts for the criteria this directory's task can speak to.
pub fn criteria(a: &Artifacts) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    match a.task() {
        Task::Iris => {
            out.push(iris_accuracy(a));
            out.push(iris_mse(a));
            out.push(co_not_worse_than_adaptive(a));
            out.push(youden_rows(a));
        }
        Task::Funapprox => {
            out.push(co_not_worse_than_adaptive(a));
            out.push(funapprox(a));
        }
        Task::Sysid => {
            out.push(co_not_worse_than_adaptive(a));
            out.push(sysid(a));
        }
    }
    out
}

pub fn iris_accuracy(a: &Artifacts) -> CriterionResult {
    const T: &str = "Iris test accuracy";
    match (a.mean(Co, "test_acc"), a.mean(Manual, "test_acc")) {
        (Some(co), Some(manual)) => CriterionResult::new(
            5,
            T,
            co >= IRIS_MIN_TEST_ACC && co >= manual,
            format!("co {co:.2}% vs floor {IRIS_MIN_TEST_ACC}% and manual {manual:.2}%"),
        ),
        _ => CriterionResult::na(5, T, "needs co and manual Iris runs"),
    }
}

pub fn iris_mse(a: &Artifacts) -> CriterionResult {
    const T: &str = "Iris training MSE level and speed";
    let (Some(co), Some(manual), Some(adaptive)) = (a.curve(Co), a.curve(Manual), a.curve(Adaptive)) else {
        return CriterionResult::na(6, T, "needs all three architectures");
    };
    let (Some(co_final), Some(co_fast), Some(m), Some(ad)) = (
        db_at(co, 2000),
        db_at(co, IRIS_CO_EPOCH),
        db_at(manual, IRIS_BASELINE_EPOCH),
        db_at(adaptive, IRIS_BASELINE_EPOCH),
    ) else {
        return CriterionResult::na(6, T, "needs at least 2000 epochs");
    };
    CriterionResult::new(
        6,
        T,
        co_final <= IRIS_MAX_FINAL_DB && co_fast <= m && co_fast <= ad,
        format!(
            "co {co_final:.2} dB at 2000 vs {IRIS_MAX_FINAL_DB} dB; co {co_fast:.2} dB at {IRIS_CO_EPOCH} vs manual {m:.2} / adaptive {ad:.2} dB at {IRIS_BASELINE_EPOCH}"
        ),
    )
}

pub fn co_not_worse_than_adaptive(a: &Artifacts) -> CriterionResult {
    const T: &str = "co final training MSE <= adaptive";
    match (a.mean(Co, "final_mse"), a.mean(Adaptive, "final_mse")) {
        (Some(co), Some(ad)) => {
            CriterionResult::new(7, T, co <= ad, format!("{}: co {co:.6e} vs adaptive {ad:.6e}", a.task()))
        }
        _ => CriterionResult::na(7, T, "needs co and adaptive runs"),
    }
}

pub fn funapprox(a: &Artifacts) -> CriterionResult {
    const T: &str = "function approximation ranking and test error band";
    let finals: Vec<(Arch, f64)> =
        Arch::ALL.iter().filter_map(|&arch| a.mean(arch, "final_mse").map(|m| (arch, m))).collect();
    let Some(&(_, co)) = finals.iter().find(|(arch, _)| *arch == Co) else {
        return CriterionResult::na(8, T, "needs co runs");
    };
    if finals.len() < 3 {
        return CriterionResult::na(8, T, "needs all three architectures");
    }
    let lowest = finals.iter().all(|&(_, m)| co <= m);
    let worst = a.summary(Co, "test_err_max_abs").and_then(|r| r.max).unwrap_or(f64::INFINITY);
    let listing: Vec<String> = finals.iter().map(|(arch, m)| format!("{arch} {m:.4e}")).collect();
    CriterionResult::new(
        8,
        T,
        lowest && worst <= FUNAPPROX_ERROR_BOUND,
        format!(
            "final MSE {}; co max |test error| over runs {worst:.4} vs {FUNAPPROX_ERROR_BOUND}",
            listing.join(", ")
        ),
    )
}

pub fn sysid(a: &Artifacts) -> CriterionResult {
    const T: &str = "system identification convergence order and agreement";
    let (Some(co), Some(manual), Some(adaptive)) = (a.curve(Co), a.curve(Manual), a.curve(Adaptive)) else {
        return CriterionResult::na(9, T, "needs all three architectures");
    };
    let settle = |c: &[CurveRow]| settle_epoch(c, SYSID_SETTLE_DB).unwrap_or(usize::MAX);
    let (sc, sm, sa) = (settle(co), settle(manual), settle(adaptive));
    let finals: Vec<f64> = [co, manual, adaptive].iter().filter_map(|c| c.last().map(|r| r.mse_db)).collect();
    let spread =
        finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - finals.iter().cloned().fold(f64::INFINITY, f64::min);
    CriterionResult::new(
        9,
        T,
        sc < sm && sc < sa && spread <= SYSID_AGREE_DB,
        format!(
            "epochs to within {SYSID_SETTLE_DB} dB: co {sc}, manual {sm}, adaptive {sa}; final spread {spread:.3} dB"
        ),
    )
}

pub fn youden_rows(a: &Artifacts) -> CriterionResult {
    const T: &str = "Youden = sensitivity + specificity - 1 on emitted rows";
    let (Some(sens), Some(spec), Some(youden)) = (a.table("sensitivity"), a.table("specificity"), a.table("youden"))
    else {
        return CriterionResult::na(10, T, "needs Iris tables");
    };
    let key = |r: &TableRow| (r.architecture.clone(), r.phase.clone(), r.class.clone());
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for y in youden {
        let se = sens.iter().find(|r| key(r) == key(y)).and_then(|r| r.mean);
        let sp = spec.iter().find(|r| key(r) == key(y)).and_then(|r| r.mean);
        match (y.mean, se, sp) {
            (Some(j), Some(se), Some(sp)) => {
                worst = worst.max((j - (se / 100.0 + sp / 100.0 - 1.0)).abs());
                checked += 1;
            }
            (None, _, _) => {}
            _ => return CriterionResult::new(10, T, false, format!("row {:?} lacks its rates", key(y))),
        }
    }
    CriterionResult::new(
        10,
        T,
        checked > 0 && worst <= YOUDEN_TABLE_TOL,
        format!("{checked} rows, worst gap {worst:.1e}"),
    )
}

/// The full report for an experiment directory.
#[derive(Debug, Clone)]
pub struct Report {
    pub dir: PathBuf,
    pub task: Task,
    pub completed: Vec<(Arch, usize, usize)>,
    pub rows: Vec<ComparisonRow>,
    pub criteria: Vec<CriterionResult>,
    pub notes: Vec<String>,
}

pub fn compare_report(dir: &Path) -> Result<Report> {
    let a = load_artifacts(dir)?;
    Ok(Report {
        dir: dir.to_path_buf(),
        task: a.task(),
        completed: a.manifest.architectures.iter().map(|s| (s.architecture, s.completed, s.diverged.len())).collect(),
        rows: comparisons(&a),
        criteria: criteria(&a),
        notes: a.manifest.notes.clone(),
    })
}

fn fmt_measured(m: Option<(f64, f64)>) -> String {
    match m {
        Some((mean, std)) if std.is_nan() => format!("{mean:.4}"),
        Some((mean, std)) => format!("{mean:.4} ± {std:.4}"),
        None => "NA".into(),
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: {} ({})", self.dir.display(), self.task)?;
        for (arch, done, diverged) in &self.completed {
            writeln!(f, "  {arch}: {done} completed, {diverged} diverged")?;
        }
        writeln!(f)?;
        writeln!(f, "{:<10} {:<30} {:>22} {:>18}  source", "arch", "metric", "measured", "published")?;
        for row in &self.rows {
            let published = match row.reference.std {
                Some(s) => format!("{:.4} ± {s:.4}", row.reference.mean),
                None => format!("{:.4}", row.reference.mean),
            };
            writeln!(
                f,
                "{:<10} {:<30} {:>22} {:>18}  {}",
                row.architecture.name(),
                row.metric,
                fmt_measured(row.measured),
                published,
                row.reference.citation
            )?;
        }
        writeln!(f)?;
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        if !self.notes.is_empty() {
            writeln!(f)?;
            writeln!(f, "notes:")?;
            for n in &self.notes {
                writeln!(f, "  - {n}")?;
            }
        }
        Ok(())
    }
}
