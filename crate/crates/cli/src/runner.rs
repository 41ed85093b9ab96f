//! Single runs: build, propagate over the time grid, compare with exact
//! evolution and evaluate observables.

use std::time::Instant;

use num_complex::Complex64;
use qkff::krylov::{
    fast_forward, fidelity, mrk_build, mrqd_build, qdavidson_build, BuildReport, ChainPropagator,
    ChainSpec, FidelityTarget, KrylovSubspace, ObservableMatrix, QDavidsonParams, StopRule,
};
use qkff::lindblad::{
    build_liouvillian, combine, lindblad_exact_propagate, liouvillian_chain, open_fast_forward,
    trotter_liouvillian_evolve, Collapse, DensityVector, LindbladSpec, LiouvillianOp,
};
use qkff::{exact_evolve, heisenberg_xyz, trotter_evolve, CVector, PauliSum, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    ChainKind, CollapseConfig, ConfigError, ExperimentConfig, LindbladPropagator, MethodKind,
    MethodParams, ModelConfig,
};
use crate::error::Result;
use crate::record::{RunRecord, SubspaceMeta, Timings};

/// A record plus the subspace it was computed from, if any.
pub struct Run {
    pub record: RunRecord,
    pub subspace: Option<KrylovSubspace>,
}

pub fn hamiltonian(model: &ModelConfig) -> qkff::Result<PauliSum> {
    match &model.terms {
        Some(terms) => PauliSum::from_triples(terms),
        None => heisenberg_xyz(model.n, model.jx, model.jy, model.jz, model.h),
    }
}

pub fn initial_state(config: &ExperimentConfig, n: usize) -> Result<StateVector> {
    match config.initial_state.as_str() {
        "neel" => Ok(StateVector::neel(n)?),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let amps = (0..1usize << n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            Ok(StateVector::from_amplitudes(n, amps)?.normalized())
        }
        bits if bits.len() == n => Ok(StateVector::from_bitstring(bits.parse()?)),
        bits => Err(ConfigError::single(
            "initial_state",
            format!("bitstring {bits:?} does not fit {n} qubits"),
        )
        .into()),
    }
}

pub fn observables(config: &ExperimentConfig) -> qkff::Result<Vec<(String, PauliSum)>> {
    config
        .observables
        .iter()
        .map(|o| Ok((o.name.clone(), PauliSum::from_triples(&o.terms)?)))
        .collect()
}

pub fn qdavidson_params(p: &MethodParams, max_dim: usize) -> QDavidsonParams {
    QDavidsonParams {
        eps: p.eps,
        dtau: p.dtau,
        svd_threshold: p.svd_threshold,
        max_dim,
        tol: p.tol,
        screening: p.screening,
    }
}

pub fn chain_spec(p: &MethodParams, kind: ChainKind) -> ChainSpec {
    ChainSpec {
        order: p.m,
        tau: p.tau,
        propagator: match kind {
            ChainKind::Exact => ChainPropagator::Exact { tol: p.tol },
            ChainKind::Trotter => ChainPropagator::Trotter {
                steps_per_interval: p.chain_steps_per_interval,
            },
        },
    }
}

/// Build a subspace with `method`'s driver.
pub fn build(
    kind: MethodKind,
    h: &PauliSum,
    r0: &StateVector,
    p: &MethodParams,
    chain: ChainKind,
    stop: &StopRule,
    max_dim: usize,
) -> qkff::Result<(KrylovSubspace, BuildReport)> {
    let qp = qdavidson_params(p, max_dim);
    let spec = chain_spec(p, chain);
    match kind {
        MethodKind::Qdavidson => qdavidson_build(h, r0, stop, &qp),
        MethodKind::Mrk => mrk_build(h, r0, &spec, stop, &qp),
        MethodKind::Mrqd => mrqd_build(h, r0, &spec, stop, &qp, p.mrqd_scope),
        other => Err(qkff::Error::InvalidArgument(format!("{other} does not build a subspace"))),
    }
}

/// Exact states on the grid, propagated interval by interval.
pub fn exact_trajectory(h: &PauliSum, psi0: &StateVector, times: &[f64], tol: f64) -> qkff::Result<Vec<StateVector>> {
    let mut out: Vec<StateVector> = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    for &t in times {
        let from = out.last().unwrap_or(psi0);
        let next = if t == prev_t { from.clone() } else { exact_evolve(h, from, t - prev_t, tol)? };
        out.push(next);
        prev_t = t;
    }
    Ok(out)
}

fn expectation(o: &PauliSum, s: &StateVector) -> qkff::Result<f64> {
    Ok(s.inner(&o.apply(s)?)?.re)
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

pub fn run(config: &ExperimentConfig) -> Result<Vec<Run>> {
    let issues = config.issues();
    if !issues.is_empty() {
        return Err(ConfigError { source: None, issues }.into());
    }
    match config.method {
        MethodKind::Exact | MethodKind::Trotter => run_statevector(config),
        MethodKind::Lindblad => run_lindblad(config),
        _ => run_subspace(config),
    }
}

fn with_oracle(config: &ExperimentConfig) -> bool {
    config.model.n <= config.oracle_cap
}

fn run_statevector(config: &ExperimentConfig) -> Result<Vec<Run>> {
    let h = hamiltonian(&config.model)?;
    let psi0 = initial_state(config, h.n_qubits())?;
    let obs = observables(config)?;
    let times = config.schedule.times();
    let trotter = config.method == MethodKind::Trotter;
    let oracle = trotter && with_oracle(config);
    let mut columns = vec!["t".to_string()];
    if oracle {
        columns.push("fidelity".into());
    }
    columns.push("norm".into());
    columns.extend(obs.iter().map(|(name, _)| name.clone()));

    let mut timings = Timings::default();
    let start = Instant::now();
    let states = if trotter {
        times
            .iter()
            .map(|&t| trotter_evolve(&h, &psi0, t, config.params.trotter_steps))
            .collect::<qkff::Result<Vec<_>>>()?
    } else {
        exact_trajectory(&h, &psi0, &times, config.params.tol)?
    };
    timings.propagate = elapsed(start);
    let start = Instant::now();
    let exact = if oracle { Some(exact_trajectory(&h, &psi0, &times, config.params.tol)?) } else { None };
    timings.oracle = elapsed(start);

    let mut rows = Vec::with_capacity(times.len());
    for (k, (&t, s)) in times.iter().zip(&states).enumerate() {
        let mut row = vec![t];
        if let Some(ex) = &exact {
            row.push(ex[k].fidelity(s)?);
        }
        row.push(s.norm_sqr());
        for (_, o) in &obs {
            row.push(expectation(o, s)?);
        }
        rows.push(row);
    }
    let record = RunRecord {
        label: config.method.to_string(),
        config: config.clone(),
        columns,
        rows,
        subspace: None,
        timings,
    };
    Ok(vec![Run { record, subspace: None }])
}

fn run_subspace(config: &ExperimentConfig) -> Result<Vec<Run>> {
    let p = &config.params;
    let h = hamiltonian(&config.model)?;
    let psi0 = initial_state(config, h.n_qubits())?;
    let obs = observables(config)?;
    let times = config.schedule.times();
    let oracle = with_oracle(config);
    let tf = config.schedule.t_final;

    let mut timings = Timings::default();
    let start = Instant::now();
    let exact = if oracle { Some(exact_trajectory(&h, &psi0, &times, p.tol)?) } else { None };
    timings.oracle = elapsed(start);

    let max_dim = p.dims.last().copied().unwrap_or(p.max_dim);
    let stop = StopRule {
        max_dim: Some(max_dim),
        max_iterations: p.max_iterations,
        max_references: p.max_references,
        fidelity: match (p.fidelity_target, &exact) {
            (Some(target), Some(ex)) => Some(FidelityTarget {
                target,
                t_final: tf,
                exact_final: ex.last().expect("grid is non-empty").clone(),
            }),
            _ => None,
        },
    };
    let start = Instant::now();
    let (grown, report) = build(config.method, &h, &psi0, p, p.chain, &stop, max_dim)?;
    timings.build = elapsed(start);

    let dims: Vec<usize> = if p.dims.is_empty() { vec![grown.dim()] } else { p.dims.clone() };
    let mut columns = vec!["t".to_string()];
    if oracle {
        columns.push("fidelity".into());
    }
    columns.push("norm".into());
    columns.extend(obs.iter().map(|(name, _)| name.clone()));

    let mut out = Vec::with_capacity(dims.len());
    for &d in &dims {
        let start = Instant::now();
        let sub = grown.prefix(d.min(grown.dim()));
        let mut c0 = CVector::zeros(sub.dim());
        c0[0] = Complex64::new(1.0, 0.0);
        let ff = fast_forward(&sub, &c0, p.svd_threshold)?;
        let mats = obs
            .iter()
            .map(|(_, o)| ObservableMatrix::new(&sub, o))
            .collect::<qkff::Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            let c = ff.coefficients(t);
            let mut row = vec![t];
            let norm = match &exact {
                Some(ex) => {
                    let (f, norm) = fidelity(&ex[k], &sub, &c)?;
                    row.push(f);
                    norm
                }
                None => (c.adjoint() * sub.e_matrix() * &c)[(0, 0)].re,
            };
            row.push(norm);
            for m in &mats {
                row.push(m.expectation(&c)?);
            }
            rows.push(row);
        }
        let label = if p.dims.is_empty() {
            config.method.to_string()
        } else {
            format!("{}_dim{d}", config.method)
        };
        let mut t = timings.clone();
        t.propagate = elapsed(start);
        let record = RunRecord {
            label,
            config: config.clone(),
            columns: columns.clone(),
            rows,
            subspace: Some(SubspaceMeta::new(&report, sub.dim(), ff.retained_rank())),
            timings: t,
        };
        out.push(Run {
            record,
            subspace: Some(sub),
        });
    }
    Ok(out)
}

pub fn collapses(config: &ExperimentConfig) -> qkff::Result<Vec<Collapse>> {
    let n = config.model.n;
    let mut out = Vec::new();
    for c in &config.lindblad.collapses {
        if let CollapseConfig::Pauli { terms, rate } = c {
            out.push(Collapse::new(PauliSum::from_triples(terms)?, *rate)?);
            continue;
        }
        let sites: Vec<usize> = match c.site() {
            Some(s) => vec![s],
            None => (1..=n).collect(),
        };
        for site in sites {
            match c {
                CollapseConfig::Damping { rate, .. } => out.push(Collapse::lowering(n, site, *rate)?),
                CollapseConfig::Raising { rate, .. } => out.push(Collapse::raising(n, site, *rate)?),
                CollapseConfig::Dephasing { rate, .. } => out.push(Collapse::dephasing(n, site, *rate)?),
                CollapseConfig::Depolarizing { rate, .. } => out.extend(Collapse::depolarizing(n, site, *rate)?),
                CollapseConfig::Pauli { .. } => unreachable!("handled above"),
            }
        }
    }
    Ok(out)
}

pub fn liouvillian(config: &ExperimentConfig) -> qkff::Result<LiouvillianOp> {
    let h = hamiltonian(&config.model)?;
    build_liouvillian(&LindbladSpec::new(h, collapses(config)?)?)
}

/// `Tr(O ρ)`: column `j` of `ρ` is contiguous under column stacking.
pub fn density_expectation(o: &PauliSum, rho: &DensityVector) -> qkff::Result<f64> {
    let n = rho.n_qubits();
    let d = rho.side();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        let col = StateVector::from_amplitudes(n, rho.amplitudes()[j * d..(j + 1) * d].to_vec())?;
        acc += o.apply(&col)?.amplitudes()[j];
    }
    Ok(acc.re)
}

fn exact_density_trajectory(l: &LiouvillianOp, rho0: &DensityVector, times: &[f64], tol: f64) -> qkff::Result<Vec<DensityVector>> {
    let mut out: Vec<DensityVector> = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    for &t in times {
        let from = out.last().unwrap_or(rho0);
        let next = if t == prev_t { from.clone() } else { lindblad_exact_propagate(l, from, t - prev_t, tol)? };
        out.push(next);
        prev_t = t;
    }
    Ok(out)
}

fn run_lindblad(config: &ExperimentConfig) -> Result<Vec<Run>> {
    let lb = &config.lindblad;
    let tol = config.params.tol;
    let l = liouvillian(config)?;
    let psi0 = initial_state(config, l.n_qubits())?;
    let rho0 = DensityVector::from_pure(&psi0);
    let obs = observables(config)?;
    let times = config.schedule.times();
    let approximate = lb.propagator != LindbladPropagator::Exact;
    let oracle = approximate && with_oracle(config);

    let mut timings = Timings::default();
    let start = Instant::now();
    let states = match lb.propagator {
        LindbladPropagator::Exact => exact_density_trajectory(&l, &rho0, &times, tol)?,
        LindbladPropagator::Trotter => times
            .iter()
            .map(|&t| trotter_liouvillian_evolve(&l, &rho0, t, lb.trotter_steps, lb.splitting, tol))
            .collect::<qkff::Result<Vec<_>>>()?,
        LindbladPropagator::FastForward => {
            let basis: Vec<DensityVector> = liouvillian_chain(&l, &rho0, lb.chain_order, lb.chain_tau, tol)?
                .into_iter()
                .map(DensityVector::normalized)
                .collect();
            let mut c0 = CVector::zeros(basis.len());
            c0[0] = Complex64::new(rho0.norm(), 0.0);
            let ff = open_fast_forward(&l, &basis, &c0, config.params.svd_threshold)?;
            times
                .iter()
                .map(|&t| combine(&basis, ff.coefficients(t).as_slice()))
                .collect::<qkff::Result<Vec<_>>>()?
        }
    };
    timings.propagate = elapsed(start);
    let start = Instant::now();
    let exact = if oracle { Some(exact_density_trajectory(&l, &rho0, &times, tol)?) } else { None };
    timings.oracle = elapsed(start);

    let mut columns = vec!["t".to_string(), "trace".into(), "purity".into()];
    if oracle {
        columns.push("distance".into());
    }
    columns.extend(obs.iter().map(|(name, _)| name.clone()));
    let mut rows = Vec::with_capacity(times.len());
    for (k, (&t, rho)) in times.iter().zip(&states).enumerate() {
        let mut row = vec![t, rho.trace().re, rho.inner(rho)?.re];
        if let Some(ex) = &exact {
            row.push(rho.distance(&ex[k])?);
        }
        for (_, o) in &obs {
            row.push(density_expectation(o, rho)?);
        }
        rows.push(row);
    }
    let record = RunRecord {
        label: format!("lindblad_{}", propagator_name(lb.propagator)),
        config: config.clone(),
        columns,
        rows,
        subspace: None,
        timings,
    };
    Ok(vec![Run { record, subspace: None }])
}

fn propagator_name(p: LindbladPropagator) -> &'static str {
    match p {
        LindbladPropagator::Exact => "exact",
        LindbladPropagator::Trotter => "trotter",
        LindbladPropagator::FastForward => "fast_forward",
    }
}
