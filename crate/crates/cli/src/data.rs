//! Iris loading. The canonical 150-row table ships inside the binary;
//! `CORBF_DATA` points the loader at another copy.

use std::path::Path;

use corbf_core::tasks::IRIS_CLASSES;
use corbf_core::Matrix;

use crate::error::{CliError, Result};

pub const IRIS_CSV: &str = include_str!("../data/iris.csv");
pub const DATA_ENV: &str = "CORBF_DATA";

const IRIS_ROWS: usize = 150;
const IRIS_PER_CLASS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct IrisTable {
    /// `4×150`, samples as columns.
    pub features: Matrix,
    pub labels: Vec<usize>,
}

/// Loads from `$CORBF_DATA` when set, else the vendored table.
pub fn load_iris() -> Result<IrisTable> {
    match std::env::var_os(DATA_ENV) {
        Some(path) => load_iris_file(Path::new(&path)),
        None => parse_iris(IRIS_CSV, "<vendored iris.csv>"),
    }
}

pub fn load_iris_file(path: &Path) -> Result<IrisTable> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_iris(&text, &path.display().to_string())
}

/// Four numeric fields and a species label per row. A first row whose
/// leading field is not numeric is taken as a header.
pub fn parse_iris(text: &str, origin: &str) -> Result<IrisTable> {
    let err = |line: u64, message: String| CliError::Parse { origin: origin.to_string(), line, message };
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());

    let mut data = Vec::with_capacity(4 * IRIS_ROWS);
    let mut labels = Vec::with_capacity(IRIS_ROWS);
    let mut last_line = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        last_line = line;
        if i == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != 5 {
            return Err(err(line, format!("expected 5 fields, found {}", record.len())));
        }
        for field in record.iter().take(4) {
            let v: f64 = field.parse().map_err(|_| err(line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(err(line, format!("non-finite feature: {field:?}")));
            }
            data.push(v);
        }
        labels.push(species_index(&record[4]).ok_or_else(|| err(line, format!("unknown species: {:?}", &record[4])))?);
    }

    if labels.len() != IRIS_ROWS {
        return Err(err(last_line, format!("expected {IRIS_ROWS} rows, found {}", labels.len())));
    }
    for (c, name) in IRIS_CLASSES.iter().enumerate() {
        let n = labels.iter().filter(|&&l| l == c).count();
        if n != IRIS_PER_CLASS {
            return Err(err(last_line, format!("expected {IRIS_PER_CLASS} rows of {name}, found {n}")));
        }
    }
    Ok(IrisTable { features: Matrix::from_col_major(4, IRIS_ROWS, data)?, labels })
}

/// Accepts `setosa`, `Iris-setosa`, `Iris setosa`, any case.
fn species_index(label: &str) -> Option<usize> {
    let lower = label.to_ascii_lowercase();
    let name = lower.strip_prefix("iris").map_or(lower.as_str(), |s| s.trim_start_matches(['-', ' ', '_']));
    IRIS_CLASSES.iter().position(|&c| c == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vendored_table_loads() {
        let t = parse_iris(IRIS_CSV, "vendored").unwrap();
        assert_eq!(t.features.cols(), 150);
        assert_eq!(t.features.col(0), &[5.1, 3.5, 1.4, 0.2]);
        assert_eq!(t.labels[0], 0);
        assert_eq!(t.labels[149], 2);
    }

    #[test]
    fn header_is_optional() {
        let body = IRIS_CSV.split_once('\n').unwrap().1;
        assert_eq!(parse_iris(body, "x").unwrap(), parse_iris(IRIS_CSV, "x").unwrap());
    }

    #[test]
    fn species_spellings() {
        assert_eq!(species_index("Iris-virginica"), Some(2));
        assert_eq!(species_index("VERSICOLOR"), Some(1));
        assert_eq!(species_index("iris setosa"), Some(0));
        assert_eq!(species_index("rose"), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = IRIS_CSV.replacen("4.9,3,1.4", "4.9,x,1.4", 1);
        match parse_iris(&bad, "bad.csv") {
            Err(CliError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("\"x\""));
            }
            other => panic!("{other:?}"),
        }
        let short: String = IRIS_CSV.lines().take(100).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_iris(&short, "s"), Err(CliError::Parse { line: 100, .. })));
        let ragged = IRIS_CSV.replacen("5.1,3.5,1.4,0.2,", "5.1,3.5,1.4,", 1);
        assert!(matches!(parse_iris(&ragged, "r"), Err(CliError::Parse { line: 2, .. })));
    }
}
