//! Krylov subspaces for fast-forwarding: construction by QDavidson,
//! multi-reference Krylov and multi-reference QDavidson, the regularized
//! generalized eigenproblem, and coefficient propagation.

mod build;
pub mod checkpoint;
mod davidson;
mod fast_forward;
mod solve;

pub use build::{
    mrk_build, mrqd_build, qdavidson_build, time_chain, BuildReport, ChainPropagator, ChainSpec,
    FidelityTarget, Method, MrqdScope, StopReason, StopRule,
};
pub use davidson::{qdavidson_step, residue_norm, QDavidsonParams, Screening, StepReport};
pub use fast_forward::{
    fast_forward, fast_forward_matrices, fidelity, observable, FFSolution, ObservableMatrix,
};
pub use solve::{regularized_solve, EigenSolution};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{hermitize, CMatrix};
use crate::pauli::PauliSum;
use crate::state::StateVector;

/// How a basis vector entered the subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Initial,
    QdavidsonCorrection { iteration: usize, eigen_index: usize },
    TimeChain { reference: usize, power: usize },
}

/// Ordered basis `{χ_k}` with cached `D_kl = <χ_k|H|χ_l>` and
/// `E_kl = <χ_k|χ_l>`. Basis vectors are stored normalized.
#[derive(Clone, Debug)]
pub struct KrylovSubspace {
    hamiltonian: PauliSum,
    basis: Vec<StateVector>,
    // H|χ_k>, reused for D updates and residues
    h_basis: Vec<StateVector>,
    d: CMatrix,
    e: CMatrix,
    provenance: Vec<Provenance>,
    qd_iterations: usize,
    exec: Exec,
}

/// `D_kl = <χ_k|H|χ_l>` and `E_kl = <χ_k|χ_l>`, one H application per
/// column, both Hermitized.
pub fn build_subspace_matrices(h: &PauliSum, basis: &[StateVector]) -> Result<(CMatrix, CMatrix)> {
    let exec = Exec::default();
    h.require_hermitian()?;
    for v in basis {
        check_register(h, v)?;
    }
    let h_basis = exec
        .map(basis.len(), |k| h.apply_with(Exec::Sequential, &basis[k]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(gram_pair(exec, basis, &h_basis))
}

fn gram_pair(exec: Exec, basis: &[StateVector], h_basis: &[StateVector]) -> (CMatrix, CMatrix) {
    let m = basis.len();
    let columns = exec.map(m, |l| {
        (0..m)
            .map(|k| {
                let d = inner_seq(&basis[k], &h_basis[l]);
                let e = inner_seq(&basis[k], &basis[l]);
                (d, e)
            })
            .collect::<Vec<_>>()
    });
    let mut d = CMatrix::zeros(m, m);
    let mut e = CMatrix::zeros(m, m);
    for (l, col) in columns.into_iter().enumerate() {
        for (k, (dv, ev)) in col.into_iter().enumerate() {
            d[(k, l)] = dv;
            e[(k, l)] = ev;
        }
    }
    hermitize(&mut d);
    hermitize(&mut e);
    (d, e)
}

fn inner_seq(a: &StateVector, b: &StateVector) -> Complex64 {
    crate::state::inner_slices(Exec::Sequential, a.amplitudes(), b.amplitudes())
}

fn check_register(h: &PauliSum, v: &StateVector) -> Result<()> {
    if v.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: v.n_qubits(),
        });
    }
    Ok(())
}

impl KrylovSubspace {
    /// An empty subspace for `h`.
    pub fn new(hamiltonian: PauliSum) -> Result<Self> {
        hamiltonian.require_hermitian()?;
        Ok(Self {
            hamiltonian,
            basis: Vec::new(),
            h_basis: Vec::new(),
            d: CMatrix::zeros(0, 0),
            e: CMatrix::zeros(0, 0),
            provenance: Vec::new(),
            qd_iterations: 0,
            exec: Exec::default(),
        })
    }

    /// Build all matrices from scratch over `basis` (each vector is
    /// normalized first).
    pub fn from_basis(
        hamiltonian: PauliSum,
        basis: Vec<StateVector>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        if provenance.len() != basis.len() {
            return Err(Error::Dimension(format!(
                "{} provenance tags for {} basis vectors",
                provenance.len(),
                basis.len()
            )));
        }
        let mut sub = Self::new(hamiltonian)?;
        let basis = basis
            .into_iter()
            .map(|v| normalized_checked(&sub.hamiltonian, v))
            .collect::<Result<Vec<_>>>()?;
        let exec = sub.exec;
        let h = &sub.hamiltonian;
        let h_basis = exec
            .map(basis.len(), |k| h.apply_with(Exec::Sequential, &basis[k]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let (d, e) = gram_pair(exec, &basis, &h_basis);
        sub.qd_iterations = provenance
            .iter()
            .filter_map(|p| match p {
                Provenance::QdavidsonCorrection { iteration, .. } => Some(*iteration),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        sub.basis = basis;
        sub.h_basis = h_basis;
        sub.d = d;
        sub.e = e;
        sub.provenance = provenance;
        Ok(sub)
    }

    /// Reassemble from stored matrices; `H|χ_k>` is recomputed.
    pub(crate) fn from_parts(
        hamiltonian: PauliSum,
        basis: Vec<StateVector>,
        d: CMatrix,
        e: CMatrix,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let m = basis.len();
        if d.shape() != (m, m) || e.shape() != (m, m) || provenance.len() != m {
            return Err(Error::Dimension(format!(
                "inconsistent subspace parts: {m} vectors, D {:?}, E {:?}, {} tags",
                d.shape(),
                e.shape(),
                provenance.len()
            )));
        }
        let mut sub = Self::new(hamiltonian)?;
        for v in &basis {
            check_register(&sub.hamiltonian, v)?;
        }
        let h = &sub.hamiltonian;
        sub.h_basis = sub
            .exec
            .map(m, |k| h.apply_with(Exec::Sequential, &basis[k]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        sub.qd_iterations = provenance
            .iter()
            .filter_map(|p| match p {
                Provenance::QdavidsonCorrection { iteration, .. } => Some(*iteration),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        sub.basis = basis;
        sub.d = d;
        sub.e = e;
        sub.provenance = provenance;
        Ok(sub)
    }

    /// Append a vector (normalized on the way in), extending `D` and `E` by
    /// one row and column.
    pub fn push(&mut self, v: StateVector, provenance: Provenance) -> Result<()> {
        let v = normalized_checked(&self.hamiltonian, v)?;
        let hv = self.hamiltonian.apply_with(self.exec, &v)?;
        let m = self.basis.len();
        let entries = self.exec.map(m, |k| {
            let chi = &self.basis[k];
            let d_kn = inner_seq(chi, &hv);
            let d_nk = inner_seq(&v, &self.h_basis[k]);
            let e_kn = inner_seq(chi, &v);
            let e_nk = inner_seq(&v, chi);
            ((d_kn + d_nk.conj()) * 0.5, (e_kn + e_nk.conj()) * 0.5)
        });
        let d_nn = Complex64::new(inner_seq(&v, &hv).re, 0.0);
        let e_nn = Complex64::new(inner_seq(&v, &v).re, 0.0);
        let mut d = CMatrix::zeros(m + 1, m + 1);
        let mut e = CMatrix::zeros(m + 1, m + 1);
        d.view_mut((0, 0), (m, m)).copy_from(&self.d);
        e.view_mut((0, 0), (m, m)).copy_from(&self.e);
        for (k, (dv, ev)) in entries.into_iter().enumerate() {
            d[(k, m)] = dv;
            d[(m, k)] = dv.conj();
            e[(k, m)] = ev;
            e[(m, k)] = ev.conj();
        }
        d[(m, m)] = d_nn;
        e[(m, m)] = e_nn;
        self.d = d;
        self.e = e;
        self.basis.push(v);
        self.h_basis.push(hv);
        if let Provenance::QdavidsonCorrection { iteration, .. } = provenance {
            self.qd_iterations = self.qd_iterations.max(iteration);
        }
        self.provenance.push(provenance);
        Ok(())
    }

    /// Keep only the first `k` basis vectors.
    pub fn truncate(&mut self, k: usize) {
        if k >= self.dim() {
            return;
        }
        self.basis.truncate(k);
        self.h_basis.truncate(k);
        self.provenance.truncate(k);
        self.d = self.d.view((0, 0), (k, k)).into_owned();
        self.e = self.e.view((0, 0), (k, k)).into_owned();
    }

    /// The leading `k`-dimensional subspace.
    pub fn prefix(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.truncate(k);
        out
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub(crate) fn h_basis(&self) -> &[StateVector] {
        &self.h_basis
    }

    pub fn d_matrix(&self) -> &CMatrix {
        &self.d
    }

    pub fn e_matrix(&self) -> &CMatrix {
        &self.e
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Number of QDavidson iterations recorded in the provenance tags.
    pub fn qdavidson_iterations(&self) -> usize {
        self.qd_iterations
    }

    /// `Σ_k c_k |χ_k>`.
    pub fn state(&self, c: &[Complex64]) -> Result<StateVector> {
        StateVector::combination(&self.basis, c)
    }
}

fn normalized_checked(h: &PauliSum, mut v: StateVector) -> Result<StateVector> {
    check_register(h, &v)?;
    let norm = v.normalize();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cannot add a vector of norm {norm} to a Krylov basis"
        )));
    }
    Ok(v)
}
