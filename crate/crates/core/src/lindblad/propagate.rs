use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityVector;
use super::liouvillian::{LiouvillianOp, Part};
use crate::error::{Error, Result};
use crate::expm::{expmv_general, expmv_hermitian, KrylovOptions};
use crate::krylov::FFSolution;
use crate::linalg::{CMatrix, CVector};

/// How a Trotter step factors the dissipative part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// Unitary factor, then the exact channel `e^{D_k τ}` of each collapse.
    /// Every factor is trace preserving.
    #[default]
    ChannelExact,
    /// Unitary factor, then per collapse the contraction factor
    /// `e^{-½γ{L†L,·}τ}` followed by the jump factor `e^{γ L·L† τ}`.
    /// Trace is preserved only to first order in `τ`.
    ContractionJump,
}

fn check_state(l: &LiouvillianOp, v: &DensityVector) -> Result<()> {
    if v.n_qubits() != l.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: l.n_qubits(),
            got: v.n_qubits(),
        });
    }
    Ok(())
}

fn exp_part(l: &LiouvillianOp, part: Part, v: &[Complex64], t: f64, opts: &KrylovOptions) -> Result<Vec<Complex64>> {
    expmv_general(
        l.exec(),
        |x, y| l.apply_slice(part, x, y),
        v,
        Complex64::new(t, 0.0),
        opts,
    )
}

/// `e^{L t} ρ0` by restarted Arnoldi.
pub fn lindblad_exact_propagate(l: &LiouvillianOp, rho0: &DensityVector, t: f64, tol: f64) -> Result<DensityVector> {
    check_state(l, rho0)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("propagation time must be ≥ 0, got {t}")));
    }
    let out = exp_part(l, Part::Full, rho0.amplitudes(), t, &KrylovOptions::with_tol(tol))?;
    DensityVector::from_amplitudes(l.n_qubits(), out)
}

/// One first-order product-formula step of length `tau`.
pub fn trotter_liouvillian_step(
    l: &LiouvillianOp,
    tau: f64,
    v: &DensityVector,
    splitting: Splitting,
    tol: f64,
) -> Result<DensityVector> {
    check_state(l, v)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("Trotter step must be > 0, got {tau}")));
    }
    let opts = KrylovOptions::with_tol(tol);
    // e^{-i[H,·]τ}; [H,·] is Hermitian in the Liouville inner product
    let mut w = if l.spec().hamiltonian.is_empty() {
        v.amplitudes().to_vec()
    } else {
        expmv_hermitian(
            l.exec(),
            |x, y| l.commutator_slice(x, y),
            v.amplitudes(),
            Complex64::new(0.0, -tau),
            &opts,
        )?
    };
    for k in 0..l.n_collapses() {
        if l.spec().collapses[k].rate == 0.0 {
            continue;
        }
        match splitting {
            Splitting::ChannelExact => w = exp_part(l, Part::Dissipator(k), &w, tau, &opts)?,
            Splitting::ContractionJump => {
                w = exp_part(l, Part::Contraction(k), &w, tau, &opts)?;
                w = exp_part(l, Part::Jump(k), &w, tau, &opts)?;
            }
        }
    }
    DensityVector::from_amplitudes(l.n_qubits(), w)
}

/// `steps` Trotter steps of length `t / steps`.
pub fn trotter_liouvillian_evolve(
    l: &LiouvillianOp,
    rho0: &DensityVector,
    t: f64,
    steps: usize,
    splitting: Splitting,
    tol: f64,
) -> Result<DensityVector> {
    check_state(l, rho0)?;
    if steps == 0 || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Trotter evolution needs steps ≥ 1 and t ≥ 0 (got {steps}, {t})"
        )));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let tau = t / steps as f64;
    let mut v = rho0.clone();
    for _ in 0..steps {
        v = trotter_liouvillian_step(l, tau, &v, splitting, tol)?;
    }
    Ok(v)
}

/// Real-time chain `{e^{L kτ} ρ0}_{k<order}` by exact propagation.
pub fn liouvillian_chain(
    l: &LiouvillianOp,
    rho0: &DensityVector,
    order: usize,
    tau: f64,
    tol: f64,
) -> Result<Vec<DensityVector>> {
    if order == 0 || !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "chains need order ≥ 1 and tau > 0 (got {order}, {tau})"
        )));
    }
    check_state(l, rho0)?;
    let mut out = vec![rho0.clone()];
    for _ in 1..order {
        let next = lindblad_exact_propagate(l, out.last().expect("non-empty"), tau, tol)?;
        out.push(next);
    }
    Ok(out)
}

/// `L_sub[kl] = <<χ_k|L|χ_l>>` and `S_sub[kl] = <<χ_k|χ_l>>`.
pub fn open_subspace_matrices(l: &LiouvillianOp, basis: &[DensityVector]) -> Result<(CMatrix, CMatrix)> {
    for v in basis {
        check_state(l, v)?;
    }
    let applied = l
        .exec()
        .map(basis.len(), |k| l.apply(&basis[k]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let m = basis.len();
    let mut ls = CMatrix::zeros(m, m);
    let mut s = CMatrix::zeros(m, m);
    for k in 0..m {
        for j in 0..m {
            ls[(k, j)] = basis[k].inner(&applied[j])?;
            s[(k, j)] = basis[k].inner(&basis[j])?;
        }
    }
    crate::linalg::hermitize(&mut s);
    Ok((ls, s))
}

/// Subspace propagation `c(t) = e^{S⁻¹ L_sub t} c(0)` over a basis of
/// unit-norm density vectors.
pub fn open_fast_forward(
    l: &LiouvillianOp,
    basis: &[DensityVector],
    c0: &CVector,
    svd_threshold: f64,
) -> Result<FFSolution> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("open fast-forward needs a non-empty basis".into()));
    }
    if let Some((k, v)) = basis.iter().enumerate().find(|(_, v)| (v.norm() - 1.0).abs() > 1e-10) {
        return Err(Error::InvalidArgument(format!(
            "basis vector {k} has Liouville norm {}, expected 1",
            v.norm()
        )));
    }
    if !(0.0..1.0).contains(&svd_threshold) {
        return Err(Error::InvalidArgument(format!(
            "svd_threshold must lie in [0, 1), got {svd_threshold}"
        )));
    }
    let (ls, s) = open_subspace_matrices(l, basis)?;
    FFSolution::general(&ls, &s, c0.clone(), svd_threshold)
}
