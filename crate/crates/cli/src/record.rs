//! Run records and their CSV form.

use std::fmt::Write as _;

use qkff::krylov::{BuildReport, Method, StopReason};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Subspace summary attached to records of subspace methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceMeta {
    pub method: Method,
    pub dimension: usize,
    /// Dimension of the growth run this record's subspace was cut from.
    pub grown_dimension: usize,
    pub retained_rank: usize,
    pub iterations: usize,
    pub references: usize,
    pub passes: usize,
    pub stop: StopReason,
    pub residuals: Vec<f64>,
}

impl SubspaceMeta {
    pub fn new(report: &BuildReport, dimension: usize, retained_rank: usize) -> Self {
        Self {
            method: report.method,
            dimension,
            grown_dimension: report.dimension,
            retained_rank,
            iterations: report.iterations,
            references: report.references,
            passes: report.passes,
            stop: report.stop,
            residuals: report.last_residuals.clone(),
        }
    }
}

/// Wall-clock seconds; kept out of the deterministic outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build: f64,
    pub propagate: f64,
    pub oracle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// File stem of this record's outputs.
    pub label: String,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceMeta>,
    #[serde(skip)]
    pub timings: Timings,
}

impl RunRecord {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Seventeen significant digits, enough to round-trip every `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[derive(Debug, thiserror::Error)]
#[error("CSV line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

pub fn from_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CsvError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(CsvError {
        line: 1,
        message: "missing header".into(),
    })?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|cell| {
                cell.parse::<f64>().map_err(|e| CsvError {
                    line: k + 2,
                    message: format!("{cell:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != columns.len() {
            return Err(CsvError {
                line: k + 2,
                message: format!("{} cells for {} columns", row.len(), columns.len()),
            });
        }
        rows.push(row);
    }
    Ok((columns, rows))
}
