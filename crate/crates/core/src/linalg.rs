//! Small dense linear algebra at subspace scale.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Replace `m` by `(m + m†) / 2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors (matching columns) of a Hermitian
/// matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Canonical orthogonalization of an overlap matrix.
///
/// Eigenpairs of `E` below `threshold × λ_max` are discarded; `transform`
/// (M × r) satisfies `transform† E transform = I` on the retained space, and
/// `transform · transform†` is the regularized inverse of `E`.
#[derive(Clone, Debug)]
pub struct OverlapFactor {
    pub transform: CMatrix,
    pub kept_eigenvalues: Vec<f64>,
    pub largest: f64,
}

impl OverlapFactor {
    pub fn new(e: &CMatrix, threshold: f64) -> Result<Self> {
        let (values, vectors) = eigh(e);
        let largest = values.last().copied().unwrap_or(0.0);
        if !(largest > 0.0) {
            return Err(Error::RankZero { largest });
        }
        let cutoff = threshold * largest;
        let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] >= cutoff).collect();
        if kept.is_empty() {
            return Err(Error::RankZero { largest });
        }
        let m = e.nrows();
        let mut transform = CMatrix::zeros(m, kept.len());
        for (col, &k) in kept.iter().enumerate() {
            let scale = 1.0 / values[k].sqrt();
            for row in 0..m {
                transform[(row, col)] = vectors[(row, k)] * scale;
            }
        }
        Ok(Self {
            transform,
            kept_eigenvalues: kept.iter().map(|&k| values[k]).collect(),
            largest,
        })
    }

    pub fn rank(&self) -> usize {
        self.transform.ncols()
    }

    /// Regularized inverse `X X†`.
    pub fn pseudo_inverse(&self) -> CMatrix {
        &self.transform * self.transform.adjoint()
    }
}

/// `c† A c`.
pub fn quadratic_form(a: &CMatrix, c: &CVector) -> Complex64 {
    (c.adjoint() * a * c)[(0, 0)]
}

/// Dense matrix exponential (Padé scaling and squaring).
pub fn expm(a: &CMatrix) -> CMatrix {
    if a.nrows() == 0 {
        return a.clone();
    }
    a.exp()
}
