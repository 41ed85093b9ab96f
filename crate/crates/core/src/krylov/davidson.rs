//! One QDavidson iteration: eigenpairs of the subspace pencil, residues,
//! imaginary-time corrections and the preconditioned acceptance test.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{regularized_solve, KrylovSubspace, Provenance};
use crate::error::{Error, Result};
use crate::evolve::imaginary_time_apply;
use crate::linalg::{hermitize, CMatrix, OverlapFactor};
use crate::pauli::PauliSum;
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QDavidsonParams {
    /// Residue threshold ε: eigenpairs with residue norm² ≤ ε² are
    /// converged, and a correction is kept only when its remainder outside
    /// the subspace has norm ≥ ε.
    pub eps: f64,
    /// Imaginary-time step Δτ of the correction map.
    pub dtau: f64,
    /// Relative cutoff on overlap eigenvalues.
    pub svd_threshold: f64,
    pub max_dim: usize,
    /// Tolerance of the Krylov exponentials used for corrections.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub screening: Screening,
}

/// What a correction's remainder `δ'` is measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Screening {
    /// The eigenvectors plus every correction already accepted in this
    /// iteration, so corrections that repeat one another are rejected.
    #[default]
    Sequential,
    /// The eigenvectors only, as they stood at the start of the iteration.
    StepStart,
}

fn default_tol() -> f64 {
    1e-12
}

impl Default for QDavidsonParams {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            dtau: 0.1,
            svd_threshold: 1e-12,
            max_dim: 64,
            tol: default_tol(),
            screening: Screening::default(),
        }
    }
}

impl QDavidsonParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eps > 0.0
            && self.dtau > 0.0
            && self.svd_threshold > 0.0
            && self.svd_threshold < 1.0
            && self.max_dim > 0
            && self.tol > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "QDavidson parameters must be positive with svd_threshold < 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub eigenvalues: Vec<f64>,
    /// Residue norm² per retained eigenpair.
    pub residuals: Vec<f64>,
    /// `(eigen index, ‖δ'‖)` for every correction that was generated.
    pub remainders: Vec<(usize, f64)>,
    pub added: usize,
    pub rejected: usize,
    /// Corrections were skipped because the dimension cap was hit.
    pub capped: bool,
    pub retained_rank: usize,
}

/// Residue norm² `Σ_kl v_k* v_l <χ_k|(H-λ)²|χ_l>`: applies `(H-λ)` once per
/// basis vector and accumulates the Gram matrix of the results.
pub fn residue_norm(h: &PauliSum, sub: &KrylovSubspace, v: &[Complex64], lambda: f64) -> Result<f64> {
    if v.len() != sub.dim() {
        return Err(Error::Dimension(format!(
            "coefficient vector has {} entries for a {}-dimensional subspace",
            v.len(),
            sub.dim()
        )));
    }
    let shifted: Vec<StateVector> = sub
        .basis()
        .iter()
        .map(|chi| {
            let mut w = h.apply(chi)?;
            w.axpy(Complex64::new(-lambda, 0.0), chi)?;
            Ok(w)
        })
        .collect::<Result<_>>()?;
    let m = shifted.len();
    let mut gram = CMatrix::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            gram[(k, l)] = shifted[k].inner(&shifted[l])?;
        }
    }
    hermitize(&mut gram);
    let mut value = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for k in 0..m {
        for l in 0..m {
            let term = v[k].conj() * gram[(k, l)] * v[l];
            value += term;
            scale += term.norm();
        }
    }
    clamp_residue(value.re, scale)
}

fn clamp_residue(value: f64, scale: f64) -> Result<f64> {
    if value < -1e-10 * scale.max(1.0) {
        return Err(Error::NegativeResidue(value));
    }
    Ok(value.max(0.0))
}

/// Corrections produced by one iteration, not yet appended.
pub(crate) struct Corrections {
    pub vectors: Vec<(StateVector, Provenance)>,
    pub report: StepReport,
}

/// Run steps (1)–(4) of an iteration against `sub` as it stands and return
/// the accepted raw corrections in ascending-eigenvalue order, at most
/// `limit` of them.
pub(crate) fn corrections(sub: &KrylovSubspace, p: &QDavidsonParams, limit: usize) -> Result<Corrections> {
    p.validate()?;
    if sub.is_empty() {
        return Err(Error::InvalidArgument("QDavidson needs a non-empty subspace".into()));
    }
    let h = sub.hamiltonian();
    let sol = regularized_solve(sub.d_matrix(), sub.e_matrix(), p.svd_threshold)?;
    let rank = sol.retained_rank;
    let mut report = StepReport {
        eigenvalues: sol.eigenvalues.clone(),
        retained_rank: rank,
        ..StepReport::default()
    };

    // ψ_i = Σ_k v_ki χ_k and (H - λ_i) ψ_i from the cached H|χ_k>
    let mut psis = Vec::with_capacity(rank);
    for i in 0..rank {
        let coeffs: Vec<Complex64> = sol.eigenvectors.column(i).iter().copied().collect();
        let psi = StateVector::combination(sub.basis(), &coeffs)?;
        let mut resid = StateVector::combination(sub.h_basis(), &coeffs)?;
        resid.axpy(Complex64::new(-sol.eigenvalues[i], 0.0), &psi)?;
        report.residuals.push(resid.norm_sqr());
        psis.push(psi);
    }

    let eps2 = p.eps * p.eps;
    if report.residuals.iter().all(|&r| r <= eps2) {
        return Ok(Corrections {
            vectors: Vec::new(),
            report,
        });
    }

    // Projector onto span{ψ}: Σ_KJ |ψ_K> (S⁻¹)_KJ <ψ_J|, S_KJ = <ψ_K|ψ_J>.
    let mut gram = CMatrix::zeros(rank, rank);
    for k in 0..rank {
        for j in 0..rank {
            gram[(k, j)] = psis[k].inner(&psis[j])?;
        }
    }
    hermitize(&mut gram);
    let s_inv = OverlapFactor::new(&gram, p.svd_threshold)?.pseudo_inverse();

    let mut vectors = Vec::new();
    // orthonormal directions of the corrections accepted so far
    let mut accepted: Vec<StateVector> = Vec::new();
    for i in 0..rank {
        if report.residuals[i] <= eps2 {
            continue;
        }
        if vectors.len() >= limit {
            report.capped = true;
            break;
        }
        let delta = imaginary_time_apply(h, sol.eigenvalues[i], p.dtau, &psis[i], p.tol)?;
        let overlaps: Vec<Complex64> = psis
            .iter()
            .map(|psi| psi.inner(&delta))
            .collect::<Result<_>>()?;
        let mut remainder = delta.clone();
        for k in 0..rank {
            let coef: Complex64 = (0..rank).map(|j| s_inv[(k, j)] * overlaps[j]).sum();
            remainder.axpy(-coef, &psis[k])?;
        }
        if p.screening == Screening::Sequential {
            for _ in 0..2 {
                for q in &accepted {
                    let c = q.inner(&remainder)?;
                    remainder.axpy(-c, q)?;
                }
            }
        }
        let rnorm = remainder.norm();
        report.remainders.push((i, rnorm));
        if rnorm >= p.eps {
            if p.screening == Screening::Sequential {
                accepted.push(remainder.normalized());
            }
            vectors.push((
                delta,
                Provenance::QdavidsonCorrection {
                    iteration: sub.qdavidson_iterations() + 1,
                    eigen_index: i,
                },
            ));
        } else {
            report.rejected += 1;
        }
    }
    Ok(Corrections { vectors, report })
}

/// One full QDavidson iteration on `sub`, appending every accepted
/// (normalized) correction until `max_dim` is reached.
pub fn qdavidson_step(sub: &mut KrylovSubspace, p: &QDavidsonParams) -> Result<StepReport> {
    if sub.dim() > p.max_dim {
        return Err(Error::InvalidArgument(format!(
            "subspace dimension {} already exceeds max_dim {}",
            sub.dim(),
            p.max_dim
        )));
    }
    let room = p.max_dim - sub.dim();
    let Corrections { vectors, mut report } = corrections(sub, p, room)?;
    for (v, tag) in vectors {
        sub.push(v, tag)?;
        report.added += 1;
    }
    Ok(report)
}
