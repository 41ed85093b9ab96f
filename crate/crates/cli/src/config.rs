//! Experiment configuration: JSON, or TOML with the same field names.

use std::fmt;
use std::path::{Path, PathBuf};

use qkff::krylov::{Method, MrqdScope, Screening};
use qkff::lindblad::Splitting;
use serde::{Deserialize, Serialize};

/// Operator term as `(axes, re, im)`.
pub type Triple = (String, f64, f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// `"neel"`, `"random"` (drawn from `seed`) or a bitstring such as `"0110"`.
    pub initial_state: String,
    pub method: MethodKind,
    pub params: MethodParams,
    pub schedule: Schedule,
    pub observables: Vec<ObservableConfig>,
    pub output: OutputConfig,
    pub seed: u64,
    /// Largest register for which exact reference evolutions are computed.
    pub oracle_cap: usize,
    pub sweep: SweepConfig,
    pub lindblad: LindbladConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            initial_state: "neel".into(),
            method: MethodKind::Exact,
            params: MethodParams::default(),
            schedule: Schedule::default(),
            observables: Vec::new(),
            output: OutputConfig::default(),
            seed: 0,
            oracle_cap: 13,
            sweep: SweepConfig::default(),
            lindblad: LindbladConfig::default(),
        }
    }
}

/// Heisenberg chain, or explicit terms when `terms` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub n: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Triple>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n: 4,
            jx: 1.0,
            jy: 1.0,
            jz: 1.0,
            h: 1.0,
            terms: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Qdavidson,
    Mrk,
    Mrqd,
    Trotter,
    Exact,
    Lindblad,
}

impl MethodKind {
    pub fn subspace_method(self) -> Option<Method> {
        match self {
            MethodKind::Qdavidson => Some(Method::Qdavidson),
            MethodKind::Mrk => Some(Method::Mrk),
            MethodKind::Mrqd => Some(Method::Mrqd),
            _ => None,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodKind::Qdavidson => "qdavidson",
            MethodKind::Mrk => "mrk",
            MethodKind::Mrqd => "mrqd",
            MethodKind::Trotter => "trotter",
            MethodKind::Exact => "exact",
            MethodKind::Lindblad => "lindblad",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    #[default]
    Exact,
    Trotter,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainKind::Exact => "exact",
            ChainKind::Trotter => "trotter",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodParams {
    /// Chain order of the multi-reference methods.
    pub m: usize,
    /// Chain time step.
    pub tau: f64,
    pub eps: f64,
    pub dtau: f64,
    pub svd_threshold: f64,
    pub max_dim: usize,
    /// Steps of the `trotter` method over each propagation interval.
    pub trotter_steps: usize,
    pub chain: ChainKind,
    /// Trotter steps per chain interval when `chain` is `trotter`.
    pub chain_steps_per_interval: usize,
    /// Tolerance of the Krylov exponentials.
    pub tol: f64,
    pub screening: Screening,
    pub mrqd_scope: MrqdScope,
    /// Subspace dimensions to report; each gets its own record built from
    /// the leading vectors of one growth run. Empty reports the final
    /// subspace.
    pub dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_references: Option<usize>,
    /// Stop growth once the fidelity at `t_final` reaches this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_target: Option<f64>,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            m: 10,
            tau: 0.1,
            eps: 1e-3,
            dtau: 0.1,
            svd_threshold: 1e-12,
            max_dim: 64,
            trotter_steps: 40,
            chain: ChainKind::Exact,
            chain_steps_per_interval: 1,
            tol: 1e-12,
            screening: Screening::default(),
            mrqd_scope: MrqdScope::default(),
            dims: Vec::new(),
            max_iterations: None,
            max_references: None,
            fidelity_target: None,
        }
    }
}

/// Uniform grid over `[0, t_final]`, both endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub t_final: f64,
    pub n_time_points: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            n_time_points: 101,
        }
    }
}

impl Schedule {
    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_time_points - 1) as f64;
        (0..self.n_time_points)
            .map(|k| {
                if k + 1 == self.n_time_points {
                    self.t_final
                } else {
                    self.t_final * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub name: String,
    pub terms: Vec<Triple>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    /// Write each built subspace as a checkpoint directory.
    pub checkpoint: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
            checkpoint: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub fidelity_target: f64,
    /// Dimension cap per cell; cells that hit it are unconverged.
    pub max_dim: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![4, 6, 8],
            methods: vec![Method::Qdavidson, Method::Mrk, Method::Mrqd],
            fidelity_target: 0.9,
            max_dim: 400,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LindbladPropagator {
    #[default]
    Exact,
    Trotter,
    /// Subspace propagation over a real-time Liouvillian chain from `ρ(0)`.
    FastForward,
}

/// Collapse operators; `site` is 1-based and omitted means every site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollapseConfig {
    Damping {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
        rate: f64,
    },
    Raising {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
        rate: f64,
    },
    Dephasing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
        rate: f64,
    },
    /// X, Y and Z, each at `rate / 3`.
    Depolarizing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
        rate: f64,
    },
    Pauli { terms: Vec<Triple>, rate: f64 },
}

impl CollapseConfig {
    pub fn rate(&self) -> f64 {
        match self {
            CollapseConfig::Damping { rate, .. }
            | CollapseConfig::Raising { rate, .. }
            | CollapseConfig::Dephasing { rate, .. }
            | CollapseConfig::Depolarizing { rate, .. }
            | CollapseConfig::Pauli { rate, .. } => *rate,
        }
    }

    pub fn site(&self) -> Option<usize> {
        match self {
            CollapseConfig::Damping { site, .. }
            | CollapseConfig::Raising { site, .. }
            | CollapseConfig::Dephasing { site, .. }
            | CollapseConfig::Depolarizing { site, .. } => *site,
            CollapseConfig::Pauli { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LindbladConfig {
    pub collapses: Vec<CollapseConfig>,
    pub propagator: LindbladPropagator,
    pub splitting: Splitting,
    /// Trotter steps over each propagation interval.
    pub trotter_steps: usize,
    /// Order and step of the chain used by `fast_forward`.
    pub chain_order: usize,
    pub chain_tau: f64,
}

impl Default for LindbladConfig {
    fn default() -> Self {
        Self {
            collapses: Vec::new(),
            propagator: LindbladPropagator::Exact,
            splitting: Splitting::default(),
            trotter_steps: 100,
            chain_order: 8,
            chain_tau: 0.1,
        }
    }
}

/// One problem found in a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    /// Dotted field path, e.g. `schedule.t_final`.
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub source: Option<PathBuf>,
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(p) => write!(f, "invalid configuration {}", p.display())?,
            None => write!(f, "invalid configuration")?,
        }
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn single(path: &str, message: impl Into<String>) -> Self {
        Self {
            source: None,
            issues: vec![Issue {
                path: path.into(),
                line: None,
                message: message.into(),
            }],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Syntax {
    Json,
    Toml,
}

impl Syntax {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("toml") => Syntax::Toml,
            _ => Syntax::Json,
        }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Best-effort source line of a dotted field path.
fn locate(text: &str, syntax: Syntax, path: &str) -> Option<usize> {
    let mut from = 0;
    let mut found = None;
    for seg in path.split('.') {
        let key = seg.split('[').next().unwrap_or(seg);
        if key.is_empty() {
            continue;
        }
        let hit = match syntax {
            Syntax::Json => text[from..].find(&format!("\"{key}\"")),
            Syntax::Toml => toml_key(&text[from..], key),
        };
        match hit {
            Some(pos) => {
                from += pos + key.len();
                found = Some(from);
            }
            None => break,
        }
    }
    found.map(|off| line_of_offset(text, off))
}

fn toml_key(text: &str, key: &str) -> Option<usize> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        let lead = line.len() - trimmed.len();
        let header = trimmed.starts_with('[')
            && trimmed
                .trim_start_matches('[')
                .split(']')
                .next()
                .is_some_and(|h| h.split('.').any(|p| p.trim() == key));
        let assign = trimmed
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        if header || assign {
            return Some(offset + lead);
        }
        offset += line.len();
    }
    None
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str, syntax: Syntax) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with(text, syntax, |_| {})
}

/// Like [`parse_config`], with `adjust` applied before validation.
pub fn parse_config_with(
    text: &str,
    syntax: Syntax,
    adjust: impl FnOnce(&mut ExperimentConfig),
) -> Result<ExperimentConfig, ConfigError> {
    let parsed: Result<ExperimentConfig, Issue> = match syntax {
        Syntax::Json => serde_json::from_str(text).map_err(|e| Issue {
            path: "<document>".into(),
            line: Some(e.line()),
            message: e.to_string(),
        }),
        Syntax::Toml => toml::from_str(text).map_err(|e| Issue {
            path: "<document>".into(),
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        }),
    };
    let mut config = parsed.map_err(|issue| ConfigError {
        source: None,
        issues: vec![issue],
    })?;
    adjust(&mut config);
    let mut issues = config.issues();
    if issues.is_empty() {
        return Ok(config);
    }
    for issue in &mut issues {
        issue.line = locate(text, syntax, &issue.path);
    }
    Err(ConfigError { source: None, issues })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    load_config_with(path, |_| {})
}

/// Like [`load_config`], with `adjust` applied before validation.
pub fn load_config_with(path: &Path, adjust: impl FnOnce(&mut ExperimentConfig)) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source: Some(path.to_path_buf()),
        issues: vec![Issue {
            path: "<file>".into(),
            line: None,
            message: e.to_string(),
        }],
    })?;
    parse_config_with(&text, Syntax::from_path(path), adjust).map_err(|mut e| {
        e.source = Some(path.to_path_buf());
        e
    })
}

fn check_terms(issues: &mut Vec<Issue>, path: &str, terms: &[Triple], n: usize, hermitian: bool) {
    if terms.is_empty() {
        issues.push(issue(path, "needs at least one term"));
    }
    for (k, (axes, re, im)) in terms.iter().enumerate() {
        let p = format!("{path}[{k}]");
        if axes.chars().count() != n {
            issues.push(issue(&p, format!("{axes:?} has {} sites, the model has {n}", axes.chars().count())));
        }
        if !axes.chars().all(|c| matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
            issues.push(issue(&p, format!("{axes:?} is not a Pauli label")));
        }
        if !re.is_finite() || !im.is_finite() {
            issues.push(issue(&p, "coefficient must be finite"));
        }
        if hermitian && *im != 0.0 {
            issues.push(issue(&p, "coefficient must be real for a Hermitian operator"));
        }
    }
}

fn issue(path: &str, message: impl Into<String>) -> Issue {
    Issue {
        path: path.into(),
        line: None,
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Every semantic problem, in field order.
    pub fn issues(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let n = self.model.n;
        if n == 0 {
            out.push(issue("model.n", "must be at least 1"));
        } else if n > 24 {
            out.push(issue("model.n", format!("{n} qubits exceed the statevector limit of 24")));
        }
        match &self.model.terms {
            Some(terms) => check_terms(&mut out, "model.terms", terms, n, true),
            None if n == 1 => out.push(issue("model.n", "the Heisenberg chain needs at least 2 sites")),
            None => {}
        }
        for (name, v) in [("jx", self.model.jx), ("jy", self.model.jy), ("jz", self.model.jz), ("h", self.model.h)] {
            if !v.is_finite() {
                out.push(issue(&format!("model.{name}"), "must be finite"));
            }
        }
        let s = self.initial_state.as_str();
        if !(s == "neel" || s == "random" || (s.len() == n && s.chars().all(|c| c == '0' || c == '1'))) {
            out.push(issue(
                "initial_state",
                format!("expected \"neel\", \"random\" or a {n}-character bitstring, got {s:?}"),
            ));
        }
        let p = &self.params;
        for (name, v) in [("tau", p.tau), ("eps", p.eps), ("dtau", p.dtau), ("tol", p.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(issue(&format!("params.{name}"), "must be positive"));
            }
        }
        if !(p.svd_threshold > 0.0 && p.svd_threshold < 1.0) {
            out.push(issue("params.svd_threshold", "must lie in (0, 1)"));
        }
        for (name, v) in [
            ("m", p.m),
            ("max_dim", p.max_dim),
            ("trotter_steps", p.trotter_steps),
            ("chain_steps_per_interval", p.chain_steps_per_interval),
        ] {
            if v == 0 {
                out.push(issue(&format!("params.{name}"), "must be at least 1"));
            }
        }
        if let Some(k) = p.dims.iter().position(|&d| d == 0 || d > p.max_dim) {
            out.push(issue(&format!("params.dims[{k}]"), format!("must lie in 1..={}", p.max_dim)));
        }
        if p.dims.windows(2).any(|w| w[0] >= w[1]) {
            out.push(issue("params.dims", "must be strictly increasing"));
        }
        if !p.dims.is_empty() && self.method.subspace_method().is_none() {
            out.push(issue("params.dims", "only applies to subspace methods"));
        }
        if let Some(f) = p.fidelity_target {
            if !(f > 0.0 && f <= 1.0) {
                out.push(issue("params.fidelity_target", "must lie in (0, 1]"));
            }
            if n > self.oracle_cap && self.method.subspace_method().is_some() {
                out.push(issue(
                    "params.fidelity_target",
                    format!("needs exact evolution, but n = {n} exceeds oracle_cap = {}", self.oracle_cap),
                ));
            }
        }
        if !(self.schedule.t_final > 0.0 && self.schedule.t_final.is_finite()) {
            out.push(issue("schedule.t_final", "must be positive"));
        }
        if self.schedule.n_time_points < 2 {
            out.push(issue("schedule.n_time_points", "must be at least 2"));
        }
        for (k, o) in self.observables.iter().enumerate() {
            check_terms(&mut out, &format!("observables[{k}].terms"), &o.terms, n, true);
            if o.name.is_empty() || o.name.contains(',') {
                out.push(issue(&format!("observables[{k}].name"), "must be non-empty without commas"));
            }
        }
        let sw = &self.sweep;
        if let Some(k) = sw.sizes.iter().position(|&s| s < 2 || s > self.oracle_cap) {
            out.push(issue(
                &format!("sweep.sizes[{k}]"),
                format!("sweep sizes need exact evolution: 2..={} (oracle_cap)", self.oracle_cap),
            ));
        }
        if !(sw.fidelity_target > 0.0 && sw.fidelity_target <= 1.0) {
            out.push(issue("sweep.fidelity_target", "must lie in (0, 1]"));
        }
        if sw.max_dim == 0 {
            out.push(issue("sweep.max_dim", "must be at least 1"));
        }
        let lb = &self.lindblad;
        for (k, col) in lb.collapses.iter().enumerate() {
            let path = format!("lindblad.collapses[{k}]");
            if !(col.rate() >= 0.0 && col.rate().is_finite()) {
                out.push(issue(&format!("{path}.rate"), "must be finite and nonnegative"));
            }
            if let Some(site) = col.site() {
                if site == 0 || site > n {
                    out.push(issue(&format!("{path}.site"), format!("must lie in 1..={n}")));
                }
            }
            if let CollapseConfig::Pauli { terms, .. } = col {
                check_terms(&mut out, &format!("{path}.terms"), terms, n, false);
            }
        }
        if self.method == MethodKind::Lindblad {
            if n > 10 {
                out.push(issue("model.n", "density vectors are limited to 10 qubits"));
            }
            if lb.trotter_steps == 0 {
                out.push(issue("lindblad.trotter_steps", "must be at least 1"));
            }
            if lb.chain_order == 0 {
                out.push(issue("lindblad.chain_order", "must be at least 1"));
            }
            if !(lb.chain_tau > 0.0) {
                out.push(issue("lindblad.chain_tau", "must be positive"));
            }
        }
        out
    }
}
