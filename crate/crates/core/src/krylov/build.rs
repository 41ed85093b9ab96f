//! Subspace growth drivers: QDavidson, multi-reference Krylov (MRK) and
//! multi-reference QDavidson (MRQD).
//!
//! All three append vectors one at a time and evaluate the stop rule after
//! every append, so a fidelity target reports the first passing dimension.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::davidson::corrections;
use super::{fast_forward_matrices, KrylovSubspace, Provenance, QDavidsonParams};
use crate::error::{Error, Result};
use crate::evolve::{exact_evolve, trotter_evolve};
use crate::linalg::CVector;
use crate::pauli::PauliSum;
use crate::state::{Bitstring, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qdavidson,
    Mrk,
    Mrqd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Qdavidson => "qdavidson",
            Method::Mrk => "mrk",
            Method::Mrqd => "mrqd",
        })
    }
}

/// Propagator used to grow real-time chains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainPropagator {
    Exact { tol: f64 },
    /// First-order product formula with this many steps per chain interval.
    Trotter { steps_per_interval: usize },
}

impl Default for ChainPropagator {
    fn default() -> Self {
        ChainPropagator::Exact { tol: 1e-12 }
    }
}

/// Order-`m` real-time chain `{e^{-iHkτ}|r>}_{k<m}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub order: usize,
    pub tau: f64,
    pub propagator: ChainPropagator,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || !(self.tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "chains need order ≥ 1 and tau > 0 (got {} and {})",
                self.order, self.tau
            )));
        }
        match self.propagator {
            ChainPropagator::Exact { tol } if !(tol > 0.0) => Err(Error::InvalidArgument(
                "exact chain propagator needs tol > 0".into(),
            )),
            ChainPropagator::Trotter { steps_per_interval: 0 } => Err(Error::InvalidArgument(
                "Trotter chain propagator needs at least one step per interval".into(),
            )),
            _ => Ok(()),
        }
    }

    fn advance(&self, h: &PauliSum, s: &StateVector) -> Result<StateVector> {
        match self.propagator {
            ChainPropagator::Exact { tol } => exact_evolve(h, s, self.tau, tol),
            ChainPropagator::Trotter { steps_per_interval } => {
                trotter_evolve(h, s, self.tau, steps_per_interval)
            }
        }
    }
}

/// Generate the full chain starting from (and including) `r`.
pub fn time_chain(h: &PauliSum, r: &StateVector, spec: &ChainSpec) -> Result<Vec<StateVector>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.order);
    out.push(r.clone());
    for _ in 1..spec.order {
        let next = spec.advance(h, out.last().expect("chain is non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Fidelity target: `|<ψ(t_final)|ψ_K(t_final)>|² ≥ target` with the initial
/// state as basis vector 0.
#[derive(Clone, Debug)]
pub struct FidelityTarget {
    pub target: f64,
    pub t_final: f64,
    pub exact_final: StateVector,
}

/// Caller-supplied stopping rules; growth stops at the first one that fires.
/// With none set, growth runs until `max_dim` or until nothing new is
/// accepted.
#[derive(Clone, Debug, Default)]
pub struct StopRule {
    pub max_dim: Option<usize>,
    pub max_iterations: Option<usize>,
    /// MRK only: number of references.
    pub max_references: Option<usize>,
    pub fidelity: Option<FidelityTarget>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    FidelityReached,
    /// A QDavidson pass accepted no new vector.
    Converged,
    MaxDimension,
    MaxIterations,
    MaxReferences,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub method: Method,
    pub dimension: usize,
    /// QDavidson: steps; MRK: references; MRQD: initial chain plus
    /// QDavidson passes.
    pub iterations: usize,
    pub references: usize,
    /// QDavidson passes (MRQD, QDavidson).
    pub passes: usize,
    pub stop: StopReason,
    /// Fidelity at `t_final` of the returned subspace, when a target was set.
    pub final_fidelity: Option<f64>,
    /// Dimension after each iteration.
    pub dimension_history: Vec<usize>,
    /// Residue norms² from the last QDavidson pass.
    pub last_residuals: Vec<f64>,
}

impl BuildReport {
    pub fn reached_target(&self) -> bool {
        self.stop == StopReason::FidelityReached
    }
}

/// Tracks `<ψ_exact(t_f)|χ_k>` incrementally and evaluates the fast-forward
/// fidelity of the current subspace.
struct FidelityMonitor {
    target: FidelityTarget,
    overlaps: Vec<Complex64>,
    svd_threshold: f64,
}

impl FidelityMonitor {
    fn fidelity(&mut self, sub: &KrylovSubspace) -> Result<f64> {
        for chi in &sub.basis()[self.overlaps.len()..] {
            self.overlaps.push(self.target.exact_final.inner(chi)?);
        }
        let m = sub.dim();
        let mut c0 = CVector::zeros(m);
        c0[0] = Complex64::new(1.0, 0.0);
        let ff = match fast_forward_matrices(sub.d_matrix(), sub.e_matrix(), &c0, self.svd_threshold) {
            Ok(ff) => ff,
            Err(Error::RankZero { .. }) => return Ok(0.0),
            Err(e) => return Err(e),
        };
        let c = ff.coefficients(self.target.t_final);
        let overlap: Complex64 = c.iter().zip(&self.overlaps).map(|(ck, ok)| ck * ok).sum();
        Ok(overlap.norm_sqr())
    }
}

/// Appends vectors one at a time and evaluates the stop rule after each.
struct Grower {
    sub: KrylovSubspace,
    cap: usize,
    monitor: Option<FidelityMonitor>,
    last_fidelity: Option<f64>,
}

impl Grower {
    fn new(h: &PauliSum, stop: &StopRule, p: &QDavidsonParams) -> Result<Self> {
        let cap = stop.max_dim.map_or(p.max_dim, |d| d.min(p.max_dim));
        if cap == 0 {
            return Err(Error::InvalidArgument("dimension cap must be at least 1".into()));
        }
        if let Some(t) = &stop.fidelity {
            if t.exact_final.n_qubits() != h.n_qubits() {
                return Err(Error::QubitMismatch {
                    expected: h.n_qubits(),
                    got: t.exact_final.n_qubits(),
                });
            }
        }
        Ok(Self {
            sub: KrylovSubspace::new(h.clone())?,
            cap,
            monitor: stop.fidelity.clone().map(|target| FidelityMonitor {
                target,
                overlaps: Vec::new(),
                svd_threshold: p.svd_threshold,
            }),
            last_fidelity: None,
        })
    }

    fn room(&self) -> usize {
        self.cap.saturating_sub(self.sub.dim())
    }

    fn push(&mut self, v: StateVector, tag: Provenance) -> Result<Option<StopReason>> {
        if self.room() == 0 {
            return Ok(Some(StopReason::MaxDimension));
        }
        self.sub.push(v, tag)?;
        if let Some(m) = &mut self.monitor {
            let f = m.fidelity(&self.sub)?;
            self.last_fidelity = Some(f);
            if f >= m.target.target {
                return Ok(Some(StopReason::FidelityReached));
            }
        }
        if self.room() == 0 {
            return Ok(Some(StopReason::MaxDimension));
        }
        Ok(None)
    }

    fn push_chain(
        &mut self,
        h: &PauliSum,
        r: &StateVector,
        reference: usize,
        spec: &ChainSpec,
    ) -> Result<(Option<StopReason>, StateVector)> {
        let mut current = r.clone();
        for power in 0..spec.order {
            if power > 0 {
                current = spec.advance(h, &current)?;
            }
            if let Some(stop) = self.push(current.clone(), Provenance::TimeChain { reference, power })? {
                return Ok((Some(stop), current));
            }
        }
        Ok((None, current))
    }
}

fn check_initial(h: &PauliSum, r0: &StateVector, p: &QDavidsonParams) -> Result<()> {
    p.validate()?;
    h.require_hermitian()?;
    if r0.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: r0.n_qubits(),
        });
    }
    Ok(())
}

/// Label of `r` if it is a single computational basis state.
fn basis_label(r: &StateVector) -> Option<Bitstring> {
    let mut nonzero = r.amplitudes().iter().enumerate().filter(|(_, a)| a.norm() > 0.0);
    match (nonzero.next(), nonzero.next()) {
        (Some((i, _)), None) => Bitstring::new(r.n_qubits(), i).ok(),
        _ => None,
    }
}

/// Grow a subspace from `r0` by repeated QDavidson steps.
pub fn qdavidson_build(
    h: &PauliSum,
    r0: &StateVector,
    stop: &StopRule,
    p: &QDavidsonParams,
) -> Result<(KrylovSubspace, BuildReport)> {
    check_initial(h, r0, p)?;
    let mut g = Grower::new(h, stop, p)?;
    let mut report = BuildReport {
        method: Method::Qdavidson,
        dimension: 0,
        iterations: 0,
        references: 1,
        passes: 0,
        stop: StopReason::Converged,
        final_fidelity: None,
        dimension_history: Vec::new(),
        last_residuals: Vec::new(),
    };
    let mut reason = g.push(r0.clone(), Provenance::Initial)?;
    while reason.is_none() {
        if stop.max_iterations.is_some_and(|cap| report.iterations >= cap) {
            reason = Some(StopReason::MaxIterations);
            break;
        }
        let batch = corrections(&g.sub, p, g.room())?;
        report.iterations += 1;
        report.passes += 1;
        report.last_residuals = batch.report.residuals.clone();
        if batch.vectors.is_empty() {
            reason = Some(StopReason::Converged);
            break;
        }
        for (v, tag) in batch.vectors {
            reason = g.push(v, tag)?;
            if reason.is_some() {
                break;
            }
        }
        report.dimension_history.push(g.sub.dim());
    }
    report.stop = reason.expect("loop exits with a reason");
    report.dimension = g.sub.dim();
    report.final_fidelity = g.last_fidelity;
    Ok((g.sub, report))
}

/// Multi-reference Krylov: chains from `r0`, then from the most probable
/// unused bitstring of the last chain's final state, and so on.
pub fn mrk_build(
    h: &PauliSum,
    r0: &StateVector,
    chain: &ChainSpec,
    stop: &StopRule,
    p: &QDavidsonParams,
) -> Result<(KrylovSubspace, BuildReport)> {
    check_initial(h, r0, p)?;
    chain.validate()?;
    let mut g = Grower::new(h, stop, p)?;
    let mut used: BTreeSet<Bitstring> = basis_label(r0).into_iter().collect();
    let mut report = BuildReport {
        method: Method::Mrk,
        dimension: 0,
        iterations: 1,
        references: 1,
        passes: 0,
        stop: StopReason::MaxDimension,
        final_fidelity: None,
        dimension_history: Vec::new(),
        last_residuals: Vec::new(),
    };
    let (mut reason, mut last) = g.push_chain(h, r0, 0, chain)?;
    report.dimension_history.push(g.sub.dim());
    while reason.is_none() {
        if stop.max_references.is_some_and(|cap| report.references >= cap) {
            reason = Some(StopReason::MaxReferences);
            break;
        }
        if stop.max_iterations.is_some_and(|cap| report.iterations >= cap) {
            reason = Some(StopReason::MaxIterations);
            break;
        }
        let label = last.argmax_bitstring(&used)?;
        used.insert(label);
        let reference = StateVector::from_bitstring(label);
        let id = report.references;
        report.references += 1;
        report.iterations += 1;
        (reason, last) = g.push_chain(h, &reference, id, chain)?;
        report.dimension_history.push(g.sub.dim());
    }
    report.stop = reason.expect("loop exits with a reason");
    report.dimension = g.sub.dim();
    report.final_fidelity = g.last_fidelity;
    Ok((g.sub, report))
}

/// Subspace the MRQD QDavidson pass diagonalizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MrqdScope {
    /// Ritz pairs of the whole chain subspace; one new reference per pass.
    #[default]
    Subspace,
    /// Ritz pairs of the reference set alone; as many new references per
    /// pass as the dimension cap leaves room for.
    References,
}

/// Multi-reference QDavidson: QDavidson passes produce new references and
/// an order-`m` chain is grown from every reference.
pub fn mrqd_build(
    h: &PauliSum,
    r0: &StateVector,
    chain: &ChainSpec,
    stop: &StopRule,
    p: &QDavidsonParams,
    scope: MrqdScope,
) -> Result<(KrylovSubspace, BuildReport)> {
    check_initial(h, r0, p)?;
    chain.validate()?;
    let mut g = Grower::new(h, stop, p)?;
    let mut refs = KrylovSubspace::new(h.clone())?;
    refs.push(r0.clone(), Provenance::Initial)?;
    let mut report = BuildReport {
        method: Method::Mrqd,
        dimension: 0,
        iterations: 1,
        references: 1,
        passes: 0,
        stop: StopReason::Converged,
        final_fidelity: None,
        dimension_history: Vec::new(),
        last_residuals: Vec::new(),
    };
    let (mut reason, _) = g.push_chain(h, r0, 0, chain)?;
    report.dimension_history.push(g.sub.dim());
    while reason.is_none() {
        if stop.max_iterations.is_some_and(|cap| report.iterations >= cap) {
            reason = Some(StopReason::MaxIterations);
            break;
        }
        let batch = match scope {
            MrqdScope::Subspace => corrections(&g.sub, p, 1)?,
            MrqdScope::References => {
                // only as many new references as the remaining room can hold chains for
                corrections(&refs, p, g.room().div_ceil(chain.order).max(1))?
            }
        };
        report.passes += 1;
        report.iterations += 1;
        report.last_residuals = batch.report.residuals.clone();
        if batch.vectors.is_empty() {
            reason = Some(StopReason::Converged);
            break;
        }
        for (v, tag) in batch.vectors {
            refs.push(v, tag)?;
            let id = refs.dim() - 1;
            report.references = refs.dim();
            let r = refs.basis()[id].clone();
            (reason, _) = g.push_chain(h, &r, id, chain)?;
            if reason.is_some() {
                break;
            }
        }
        report.dimension_history.push(g.sub.dim());
    }
    report.stop = reason.expect("loop exits with a reason");
    report.dimension = g.sub.dim();
    report.final_fidelity = g.last_fidelity;
    Ok((g.sub, report))
}
