//! Files written by the CLI.
//!
//! Runs: `<label>.csv` plus `<label>.json` metadata (format `csv`), or one
//! `<label>.json` holding rows and metadata (format `json`). Sweeps:
//! `sweep.json` or `compare.json`. Checkpoints: `<label>.subspace/`.
//! Wall-clock timings go to `timings.json`, the only file that varies
//! between identical runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qkff::krylov::checkpoint;
use serde::Serialize;

use crate::config::Format;
use crate::error::{CliError, Result};
use crate::record::{to_csv, RunRecord, Timings};
use crate::runner::Run;
use crate::sweep::{CompareTable, SweepTable};

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(qkff::Error::from)?;
    text.push('\n');
    write(path, text)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Serialize)]
struct Metadata<'a> {
    label: &'a str,
    data: String,
    rows: usize,
    columns: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    subspace: &'a Option<crate::record::SubspaceMeta>,
    config: &'a crate::config::ExperimentConfig,
}

pub fn write_runs(dir: &Path, format: Format, checkpoints: bool, runs: &[Run]) -> Result<()> {
    ensure_dir(dir)?;
    let mut timings: BTreeMap<&str, &Timings> = BTreeMap::new();
    for run in runs {
        let r: &RunRecord = &run.record;
        match format {
            Format::Csv => {
                let data = format!("{}.csv", r.label);
                write(&dir.join(&data), to_csv(&r.columns, &r.rows))?;
                let meta = Metadata {
                    label: &r.label,
                    data,
                    rows: r.rows.len(),
                    columns: &r.columns,
                    subspace: &r.subspace,
                    config: &r.config,
                };
                write_json(&dir.join(format!("{}.json", r.label)), &meta)?;
            }
            Format::Json => write_json(&dir.join(format!("{}.json", r.label)), r)?,
        }
        if let (true, Some(sub)) = (checkpoints, &run.subspace) {
            let params = serde_json::json!({"label": r.label, "config": r.config});
            checkpoint::save(&dir.join(format!("{}.subspace", r.label)), sub, params)?;
        }
        timings.insert(&r.label, &r.timings);
    }
    write_json(&dir.join("timings.json"), &timings)
}

pub fn write_sweep(dir: &Path, table: &SweepTable) -> Result<()> {
    ensure_dir(dir)?;
    write_json(&dir.join("sweep.json"), table)
}

pub fn write_compare(dir: &Path, table: &CompareTable) -> Result<()> {
    ensure_dir(dir)?;
    write_json(&dir.join("compare.json"), table)
}
