//! Plain-CSV artifacts: learning curves, metric tables, run summaries,
//! error surfaces and predicted-vs-actual traces. Undefined cells are `NA`;
//! an all-zero MSE is written as `-inf` in its dB column. Trained models
//! are stored as versioned JSON.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use corbf_core::metrics::ErrorSurface;
use corbf_core::trainer::EpochRecord;
use corbf_core::{CosineParams, GaussianParams, KernelBank, Matrix, RbfModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const NA: &str = "NA";
pub const CURVE_HEADER: [&str; 5] = ["epoch", "mse_linear", "mse_db", "train_acc", "test_acc"];
pub const TABLE_HEADER: [&str; 5] = ["architecture", "phase", "class", "mean", "std"];
pub const SUMMARY_HEADER: [&str; 7] = ["architecture", "metric", "mean", "std", "min", "max", "n"];

/// One learning-curve row. Accuracies are fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub epoch: usize,
    pub mse_linear: f64,
    pub mse_db: f64,
    pub train_acc: Option<f64>,
    pub test_acc: Option<f64>,
}

impl From<&EpochRecord> for CurveRow {
    fn from(r: &EpochRecord) -> Self {
        Self { epoch: r.epoch, mse_linear: r.mse, mse_db: r.mse_db, train_acc: r.train_acc, test_acc: r.test_acc }
    }
}

/// One row of an accuracy, sensitivity, specificity or Youden table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub architecture: String,
    pub phase: String,
    pub class: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub architecture: String,
    pub metric: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub n: usize,
}

pub fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

pub fn fmt_fixed(v: Option<f64>, decimals: usize) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.decimals$}"),
        other => fmt_value(other),
    }
}

pub fn parse_value(field: &str) -> Option<Option<f64>> {
    if field == NA {
        return Some(None);
    }
    field.parse().ok().map(Some)
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(CliError::io(path))?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Parse {
        origin: path.display().to_string(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Records of a CSV file with the expected header, each paired with its
/// line number.
fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut r = csv::Reader::from_reader(file);
    let found = r.headers().map_err(csv_err(path))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::Parse {
            origin: path.display().to_string(),
            line: 1,
            message: format!("expected header {}", header.join(",")),
        });
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            Ok((rec.position().map_or(0, |p| p.line()), rec))
        })
        .collect()
}

fn field<T>(path: &Path, line: u64, rec: &csv::StringRecord, i: usize, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    parse(raw).ok_or_else(|| CliError::Parse {
        origin: path.display().to_string(),
        line,
        message: format!("bad value in column {}: {raw:?}", i + 1),
    })
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    write_rows(
        path,
        &CURVE_HEADER,
        rows.iter().map(|r| {
            [
                r.epoch.to_string(),
                r.mse_linear.to_string(),
                r.mse_db.to_string(),
                fmt_value(r.train_acc),
                fmt_value(r.test_acc),
            ]
        }),
    )
}

pub fn read_curve(path: &Path) -> Result<Vec<CurveRow>> {
    read_rows(path, &CURVE_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            let real = |s: &str| s.parse::<f64>().ok();
            Ok(CurveRow {
                epoch: field(path, line, &rec, 0, |s| s.parse().ok())?,
                mse_linear: field(path, line, &rec, 1, real)?,
                mse_db: field(path, line, &rec, 2, real)?,
                train_acc: field(path, line, &rec, 3, parse_value)?,
                test_acc: field(path, line, &rec, 4, parse_value)?,
            })
        })
        .collect()
}

/// Means and standard deviations at `decimals` places.
pub fn write_table(path: &Path, rows: &[TableRow], decimals: usize) -> Result<()> {
    write_rows(
        path,
        &TABLE_HEADER,
        rows.iter().map(|r| {
            [
                r.architecture.clone(),
                r.phase.clone(),
                r.class.clone(),
                fmt_fixed(r.mean, decimals),
                fmt_fixed(r.std, decimals),
            ]
        }),
    )
}

pub fn read_table(path: &Path) -> Result<Vec<TableRow>> {
    read_rows(path, &TABLE_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(TableRow {
                architecture: rec[0].to_string(),
                phase: rec[1].to_string(),
                class: rec[2].to_string(),
                mean: field(path, line, &rec, 3, parse_value)?,
                std: field(path, line, &rec, 4, parse_value)?,
            })
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        path,
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            [
                r.architecture.clone(),
                r.metric.clone(),
                fmt_value(r.mean),
                fmt_value(r.std),
                fmt_value(r.min),
                fmt_value(r.max),
                r.n.to_string(),
            ]
        }),
    )
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path, &SUMMARY_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(SummaryRow {
                architecture: rec[0].to_string(),
                metric: rec[1].to_string(),
                mean: field(path, line, &rec, 2, parse_value)?,
                std: field(path, line, &rec, 3, parse_value)?,
                min: field(path, line, &rec, 4, parse_value)?,
                max: field(path, line, &rec, 5, parse_value)?,
                n: field(path, line, &rec, 6, |s| s.parse().ok())?,
            })
        })
        .collect()
}

/// `x1,x2,error` in grid order.
pub fn write_surface(path: &Path, s: &ErrorSurface) -> Result<()> {
    let rows = s.xs.iter().enumerate().flat_map(|(i, x)| {
        s.ys.iter().enumerate().map(move |(j, y)| [x.to_string(), y.to_string(), s.at(i, j).to_string()])
    });
    write_rows(path, &["x1", "x2", "error"], rows)
}

pub fn read_surface(path: &Path) -> Result<Vec<[f64; 3]>> {
    read_rows(path, &["x1", "x2", "error"])?
        .into_iter()
        .map(|(line, rec)| {
            let real = |s: &str| s.parse::<f64>().ok();
            Ok([
                field(path, line, &rec, 0, real)?,
                field(path, line, &rec, 1, real)?,
                field(path, line, &rec, 2, real)?,
            ])
        })
        .collect()
}

/// `t,u,actual,predicted` for the system identification test signal.
pub fn write_signal(path: &Path, input: &[f64], actual: &[f64], predicted: &[f64]) -> Result<()> {
    let rows = input
        .iter()
        .zip(actual)
        .zip(predicted)
        .enumerate()
        .map(|(t, ((u, a), p))| [t.to_string(), u.to_string(), a.to_string(), p.to_string()]);
    write_rows(path, &["t", "u", "actual", "predicted"], rows)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path).map_err(CliError::io(path))?;
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io { path: path.into(), source: e.into() })?;
    writeln!(file, "{text}").map_err(CliError::io(path))
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: RbfModel,
}

/// Trained network as pretty JSON: centers, kernel parameters, fusion mode,
/// weights and bias of every head.
pub fn write_model(path: &Path, model: &RbfModel) -> Result<()> {
    write_json(path, &ModelFile { format_version: MODEL_FORMAT_VERSION, model: model.clone() })
}

/// Reads a model file and re-checks every invariant the constructors
/// enforce.
pub fn read_model(path: &Path) -> Result<RbfModel> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let parse_err = |line: u64, message: String| CliError::Parse { origin: path.display().to_string(), line, message };
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| parse_err(e.line() as u64, e.to_string()))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(parse_err(0, format!("unsupported model format version {}", file.format_version)));
    }
    let invalid = |e: corbf_core::Error| parse_err(0, e.to_string());
    let m = file.model;
    let b = m.bank();
    let c = b.centers();
    let bank = KernelBank::with_order(
        Matrix::from_col_major(c.rows(), c.cols(), c.as_slice().to_vec()).map_err(invalid)?,
        GaussianParams::new(b.gaussian().sigma()).map_err(invalid)?,
        CosineParams::new(b.cosine().epsilon()).map_err(invalid)?,
        b.kernel_order().to_vec(),
    )
    .map_err(invalid)?;
    RbfModel::new(bank, m.heads().to_vec()).map_err(invalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_formatting() {
        assert_eq!(fmt_fixed(Some(99.126), 2), "99.13");
        assert_eq!(fmt_fixed(Some(0.91), 4), "0.9100");
        assert_eq!(fmt_fixed(None, 2), "NA");
        assert_eq!(fmt_value(Some(f64::NEG_INFINITY)), "-inf");
        assert_eq!(parse_value("-inf"), Some(Some(f64::NEG_INFINITY)));
        assert_eq!(parse_value("NA"), Some(None));
        assert_eq!(parse_value("abc"), None);
    }
}
