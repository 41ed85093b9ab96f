use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::StateVector;

/// Column-stacked density matrix: entry `ρ[i, j]` lives at `i + j·2^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl DensityVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = 1usize << (2 * n_qubits);
        if amplitudes.len() != expected {
            return Err(Error::Dimension(format!(
                "{} entries for a {n_qubits}-qubit density vector (expected {expected})",
                amplitudes.len()
            )));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// `|ψ><ψ|`.
    pub fn from_pure(psi: &StateVector) -> Self {
        let d = psi.dim();
        let a = psi.amplitudes();
        let mut amplitudes = Vec::with_capacity(d * d);
        for j in 0..d {
            let cj = a[j].conj();
            amplitudes.extend(a.iter().map(|ai| ai * cj));
        }
        Self {
            n_qubits: psi.n_qubits(),
            amplitudes,
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            amplitudes[i + i * d] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension `2^n` (the matrix side).
    pub fn side(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.amplitudes[row + col * self.side()]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.side();
        (0..d).map(|i| self.amplitudes[i + i * d]).sum()
    }

    /// Liouville inner product `<<self|other>> = Tr(self† other)`.
    pub fn inner(&self, other: &DensityVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &DensityVector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Scale to unit Frobenius norm; returns the old norm.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
        norm
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `Tr(O ρ)` for a dense operator `O`.
    pub fn expectation_dense(&self, o: &CMatrix) -> Result<Complex64> {
        let d = self.side();
        if o.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "observable is {:?}, state side is {d}",
                o.shape()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for i in 0..d {
                acc += o[(j, i)] * self.amplitudes[i + j * d];
            }
        }
        Ok(acc)
    }
}

/// Column-stack a square `2^n × 2^n` matrix.
pub fn vectorize(rho: &CMatrix) -> Result<DensityVector> {
    let d = rho.nrows();
    if d != rho.ncols() || !d.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "density matrix must be square with power-of-two side, got {:?}",
            rho.shape()
        )));
    }
    DensityVector::from_amplitudes(d.trailing_zeros() as usize, rho.as_slice().to_vec())
}

pub fn devectorize(v: &DensityVector) -> CMatrix {
    let d = v.side();
    CMatrix::from_column_slice(d, d, &v.amplitudes)
}

/// `Σ_k c_k χ_k`.
pub fn combine(basis: &[DensityVector], c: &[Complex64]) -> Result<DensityVector> {
    let first = basis
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty density basis".into()))?;
    if c.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} basis vectors",
            c.len(),
            basis.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); first.amplitudes.len()];
    for (chi, ck) in basis.iter().zip(c) {
        if chi.n_qubits != first.n_qubits {
            return Err(Error::QubitMismatch {
                expected: first.n_qubits,
                got: chi.n_qubits,
            });
        }
        for (o, a) in out.iter_mut().zip(&chi.amplitudes) {
            *o += ck * a;
        }
    }
    DensityVector::from_amplitudes(first.n_qubits, out)
}
