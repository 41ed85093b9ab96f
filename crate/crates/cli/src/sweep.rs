//! Required-dimension sweeps over system sizes and methods.

use std::path::Path;

use qkff::krylov::{checkpoint, FidelityTarget, Method, StopReason, StopRule};
use qkff::exact_evolve;
use serde::{Deserialize, Serialize};

use crate::config::{ChainKind, ConfigError, ExperimentConfig, MethodKind, ModelConfig};
use crate::error::{CliError, Result};
use crate::runner::{build, hamiltonian, initial_state};

/// One `(n, method, chain)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub method: Method,
    /// Chain propagator of the multi-reference methods.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainKind>,
    /// First dimension whose fidelity at `t_final` met the target.
    pub required_dimension: Option<usize>,
    pub dimension: usize,
    pub iterations: usize,
    pub references: usize,
    pub passes: usize,
    pub stop: StopReason,
    pub final_fidelity: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn unconverged(&self) -> usize {
        self.rows.iter().filter(|r| !r.converged).count()
    }

    pub fn row(&self, n: usize, method: Method) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.n == n && r.method == method)
    }
}

/// Exact and Trotter chains side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    pub method: Method,
    pub tau: f64,
    pub exact_dimension: Option<usize>,
    pub trotter_dimension: Option<usize>,
    pub exact: SweepRow,
    pub trotter: SweepRow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub config: ExperimentConfig,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn unconverged(&self) -> usize {
        self.rows
            .iter()
            .map(|r| usize::from(!r.exact.converged) + usize::from(!r.trotter.converged))
            .sum()
    }
}

fn method_kind(m: Method) -> MethodKind {
    match m {
        Method::Qdavidson => MethodKind::Qdavidson,
        Method::Mrk => MethodKind::Mrk,
        Method::Mrqd => MethodKind::Mrqd,
    }
}

fn check_base(base: &ExperimentConfig) -> Result<()> {
    let issues = base.issues();
    if !issues.is_empty() {
        return Err(ConfigError { source: None, issues }.into());
    }
    if base.model.terms.is_some() {
        return Err(ConfigError::single("model.terms", "sweeps vary n and need the Heisenberg chain").into());
    }
    if !matches!(base.initial_state.as_str(), "neel" | "random") {
        return Err(ConfigError::single("initial_state", "sweeps vary n and need \"neel\" or \"random\"").into());
    }
    if base.sweep.sizes.is_empty() || base.sweep.methods.is_empty() {
        return Err(ConfigError::single("sweep", "needs at least one size and one method").into());
    }
    Ok(())
}

fn cell_name(n: usize, method: Method, chain: Option<ChainKind>) -> String {
    match chain {
        Some(c) => format!("n{n}_{method}_{c}"),
        None => format!("n{n}_{method}"),
    }
}

/// Grow one cell's subspace until the fidelity target is met. With a
/// checkpoint directory, a cell whose stored parameters match is reused.
pub fn sweep_cell(
    base: &ExperimentConfig,
    n: usize,
    method: Method,
    chain: Option<ChainKind>,
    checkpoints: Option<&Path>,
) -> Result<SweepRow> {
    let mut config = base.clone();
    config.model = ModelConfig { n, ..base.model.clone() };
    let key = serde_json::json!({
        "model": config.model,
        "initial_state": config.initial_state,
        "seed": config.seed,
        "params": config.params,
        "schedule": config.schedule,
        "sweep": {"fidelity_target": base.sweep.fidelity_target, "max_dim": base.sweep.max_dim},
        "method": method,
        "chain": chain,
    });
    let dir = checkpoints.map(|d| d.join(cell_name(n, method, chain)));
    if let Some(dir) = &dir {
        if let Ok(manifest) = checkpoint::read_manifest(dir) {
            if manifest.parameters.get("key") == Some(&key) {
                if let Some(row) = manifest.parameters.get("row") {
                    if let Ok(row) = serde_json::from_value::<SweepRow>(row.clone()) {
                        return Ok(row);
                    }
                }
            }
        }
    }

    let p = &config.params;
    let h = hamiltonian(&config.model)?;
    let r0 = initial_state(&config, n)?;
    let t_final = config.schedule.t_final;
    let exact_final = exact_evolve(&h, &r0, t_final, p.tol)?;
    let stop = StopRule {
        max_dim: Some(base.sweep.max_dim),
        fidelity: Some(FidelityTarget {
            target: base.sweep.fidelity_target,
            t_final,
            exact_final,
        }),
        ..Default::default()
    };
    let (sub, report) = build(
        method_kind(method),
        &h,
        &r0,
        p,
        chain.unwrap_or_default(),
        &stop,
        base.sweep.max_dim,
    )?;
    let converged = report.reached_target();
    let row = SweepRow {
        n,
        method,
        chain,
        required_dimension: converged.then_some(report.dimension),
        dimension: report.dimension,
        iterations: report.iterations,
        references: report.references,
        passes: report.passes,
        stop: report.stop,
        final_fidelity: report.final_fidelity,
        converged,
    };
    if let Some(dir) = &dir {
        checkpoint::save(dir, &sub, serde_json::json!({"key": key, "row": row}))?;
    }
    Ok(row)
}

#[cfg(feature = "parallel")]
fn run_cells<T, F>(cells: &[T], f: F) -> Vec<Result<SweepRow>>
where
    T: Sync,
    F: Fn(&T) -> Result<SweepRow> + Sync + Send,
{
    use rayon::prelude::*;
    cells.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_cells<T, F>(cells: &[T], f: F) -> Vec<Result<SweepRow>>
where
    F: Fn(&T) -> Result<SweepRow>,
{
    cells.iter().map(f).collect()
}

fn collect(rows: Vec<Result<SweepRow>>) -> Result<Vec<SweepRow>> {
    rows.into_iter().collect::<std::result::Result<Vec<_>, CliError>>()
}

/// Rows sorted by `(n, method, chain)`; cells run concurrently.
pub fn scaling_sweep(base: &ExperimentConfig, checkpoints: Option<&Path>) -> Result<SweepTable> {
    check_base(base)?;
    let mut cells = Vec::new();
    for &n in &base.sweep.sizes {
        for &m in &base.sweep.methods {
            let chain = (m != Method::Qdavidson).then_some(base.params.chain);
            cells.push((n, m, chain));
        }
    }
    cells.sort();
    cells.dedup();
    let rows = collect(run_cells(&cells, |&(n, m, chain)| sweep_cell(base, n, m, chain, checkpoints)))?;
    Ok(SweepTable {
        config: base.clone(),
        rows,
    })
}

/// Each multi-reference method with exact and with Trotter chains.
pub fn trotter_compare(base: &ExperimentConfig, checkpoints: Option<&Path>) -> Result<CompareTable> {
    check_base(base)?;
    let mut methods: Vec<Method> = base.sweep.methods.iter().copied().filter(|&m| m != Method::Qdavidson).collect();
    if methods.is_empty() {
        return Err(ConfigError::single("sweep.methods", "trotter-compare needs mrk or mrqd").into());
    }
    methods.sort();
    methods.dedup();
    let mut cells = Vec::new();
    for &n in &base.sweep.sizes {
        for &m in &methods {
            for chain in [ChainKind::Exact, ChainKind::Trotter] {
                cells.push((n, m, chain));
            }
        }
    }
    cells.sort();
    cells.dedup();
    let rows = collect(run_cells(&cells, |&(n, m, chain)| sweep_cell(base, n, m, Some(chain), checkpoints)))?;
    let mut out = Vec::new();
    for pair in rows.chunks(2) {
        let (exact, trotter) = (pair[0].clone(), pair[1].clone());
        out.push(CompareRow {
            n: exact.n,
            method: exact.method,
            tau: base.params.tau,
            exact_dimension: exact.required_dimension,
            trotter_dimension: trotter.required_dimension,
            exact,
            trotter,
        });
    }
    Ok(CompareTable {
        config: base.clone(),
        rows: out,
    })
}
