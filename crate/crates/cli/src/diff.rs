//! Cell-by-cell comparison of two results CSVs.

use std::fmt;
use std::path::Path;

/// Wall-clock time differs between runs by nature.
const IGNORED: &[&str] = &["seconds"];
const REQUIRED: &[&str] = &[
    "experiment",
    "h",
    "alpha",
    "C",
    "analytic_total",
    "mc_mean",
    "mc_stderr",
];

#[derive(Debug, thiserror::Error)]
pub enum DiffError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("schema mismatch: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    /// Zero-based data row.
    pub row: usize,
    pub column: String,
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffReport {
    pub differences: Vec<Difference>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }

    /// Names of the columns with at least one difference, in column order
    /// of first appearance.
    pub fn columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = Vec::new();
        for d in &self.differences {
            if !cols.contains(&d.column.as_str()) {
                cols.push(&d.column);
            }
        }
        cols
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.differences {
            writeln!(f, "row {} column {}: {} != {}", d.row, d.column, d.a, d.b)?;
        }
        Ok(())
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read(path: &Path) -> Result<Table, DiffError> {
    let io = |e: csv::Error| DiffError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header: Vec<String> = r.headers().map_err(io)?.iter().map(String::from).collect();
    for col in REQUIRED {
        if !header.iter().any(|h| h == col) {
            return Err(DiffError::Schema(format!(
                "{} lacks column {col}",
                path.display()
            )));
        }
    }
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(io)?;
    Ok(Table { header, rows })
}

fn cells_match(a: &str, b: &str, rel_tol: f64) -> bool {
    if a == b {
        return true;
    }
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => {
            x == y || (x - y).abs() <= rel_tol * x.abs().max(y.abs()) || (x.is_nan() && y.is_nan())
        }
        _ => false,
    }
}

/// Lists every cell whose values differ by more than `rel_tol` relative
/// (exact comparison for `rel_tol = 0`). Non-numeric cells compare as text.
pub fn diff_results(a: &Path, b: &Path, rel_tol: f64) -> Result<DiffReport, DiffError> {
    let (ta, tb) = (read(a)?, read(b)?);
    if ta.header != tb.header {
        return Err(DiffError::Schema(format!(
            "headers differ: {:?} vs {:?}",
            ta.header, tb.header
        )));
    }
    if ta.rows.len() != tb.rows.len() {
        return Err(DiffError::Schema(format!(
            "row counts differ: {} vs {}",
            ta.rows.len(),
            tb.rows.len()
        )));
    }
    let mut report = DiffReport::default();
    for (i, (ra, rb)) in ta.rows.iter().zip(&tb.rows).enumerate() {
        for (col, (x, y)) in ta.header.iter().zip(ra.iter().zip(rb)) {
            if IGNORED.contains(&col.as_str()) || cells_match(x, y, rel_tol) {
                continue;
            }
            report.differences.push(Difference {
                row: i,
                column: col.clone(),
                a: x.clone(),
                b: y.clone(),
            });
        }
    }
    Ok(report)
}
