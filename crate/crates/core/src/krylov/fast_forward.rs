//! Subspace Schrödinger equation `i S ċ = D c` and the quantities read off
//! its solution.

use num_complex::Complex64;

use super::KrylovSubspace;
use crate::error::{Error, Result};
use crate::linalg::{eigh, expm, hermitize, CMatrix, CVector, OverlapFactor};
use crate::pauli::PauliSum;
use crate::state::StateVector;

#[derive(Clone, Debug)]
enum Propagation {
    /// Hermitian pencil diagonalized once: `G V = V Λ` with `V = X W`.
    Spectral {
        vectors: CMatrix,
        eigenvalues: Vec<f64>,
        // V† E c0, the retained-space coordinates of c0
        a: CVector,
        // V† D (c0 - V a), drive from the discarded directions
        b: CVector,
    },
    /// General generator, exponentiated densely per evaluation.
    Dense,
}

/// `c(t) = exp(G t) c(0)` for a fixed subspace generator `G`.
#[derive(Clone, Debug)]
pub struct FFSolution {
    c0: CVector,
    generator: CMatrix,
    retained_rank: usize,
    propagation: Propagation,
}

impl FFSolution {
    /// Closed system: `G = -i S⁻¹ D` with the regularized inverse.
    pub(crate) fn closed(d: &CMatrix, e: &CMatrix, c0: CVector, svd_threshold: f64) -> Result<Self> {
        check_c0(d.nrows(), &c0)?;
        let factor = OverlapFactor::new(e, svd_threshold)?;
        let x = &factor.transform;
        let mut projected = x.adjoint() * d * x;
        hermitize(&mut projected);
        let (eigenvalues, w) = eigh(&projected);
        let vectors = x * w;
        let a = vectors.adjoint() * e * &c0;
        let perp = &c0 - &vectors * &a;
        let b = vectors.adjoint() * d * &perp;
        let generator = factor.pseudo_inverse() * d * Complex64::new(0.0, -1.0);
        Ok(Self {
            c0,
            generator,
            retained_rank: factor.rank(),
            propagation: Propagation::Spectral {
                vectors,
                eigenvalues,
                a,
                b,
            },
        })
    }

    /// General system: `G = S⁻¹ L` with the regularized inverse.
    pub(crate) fn general(l: &CMatrix, e: &CMatrix, c0: CVector, svd_threshold: f64) -> Result<Self> {
        check_c0(l.nrows(), &c0)?;
        if l.shape() != e.shape() {
            return Err(Error::Dimension(format!(
                "generator is {:?} but overlap is {:?}",
                l.shape(),
                e.shape()
            )));
        }
        let factor = OverlapFactor::new(e, svd_threshold)?;
        let generator = factor.pseudo_inverse() * l;
        Ok(Self {
            c0,
            generator,
            retained_rank: factor.rank(),
            propagation: Propagation::Dense,
        })
    }

    pub fn c0(&self) -> &CVector {
        &self.c0
    }

    /// The fixed matrix `G` with `ċ = G c`.
    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn retained_rank(&self) -> usize {
        self.retained_rank
    }

    /// `c(t)`, in closed form; `c(0)` is returned bit-for-bit.
    pub fn coefficients(&self, t: f64) -> CVector {
        match &self.propagation {
            Propagation::Spectral {
                vectors,
                eigenvalues,
                a,
                b,
            } => {
                // exp(G t) c0 = c0 + V [(e^{-iλt} - 1) a + (e^{-iλt} - 1)/λ · b]
                let mut y = CVector::zeros(eigenvalues.len());
                for (k, &lambda) in eigenvalues.iter().enumerate() {
                    let theta = lambda * t;
                    let half = (0.5 * theta).sin();
                    let em1 = Complex64::new(-2.0 * half * half, -theta.sin());
                    let phi = if lambda.abs() * t.abs() > 1e-8 {
                        em1 / lambda
                    } else {
                        // series of (e^{-iλt} - 1)/λ
                        Complex64::new(-0.5 * lambda * t * t, -t)
                    };
                    y[k] = em1 * a[k] + phi * b[k];
                }
                &self.c0 + vectors * y
            }
            Propagation::Dense => {
                if t == 0.0 {
                    return self.c0.clone();
                }
                expm(&(&self.generator * Complex64::new(t, 0.0))) * &self.c0
            }
        }
    }
}

fn check_c0(m: usize, c0: &CVector) -> Result<()> {
    if c0.len() != m {
        return Err(Error::Dimension(format!(
            "initial coefficients have {} entries for a {m}-dimensional subspace",
            c0.len()
        )));
    }
    Ok(())
}

/// Fast-forward a closed-system subspace from coordinates `c0`.
pub fn fast_forward(sub: &KrylovSubspace, c0: &CVector, svd_threshold: f64) -> Result<FFSolution> {
    FFSolution::closed(sub.d_matrix(), sub.e_matrix(), c0.clone(), svd_threshold)
}

/// As [`fast_forward`] from bare matrices.
pub fn fast_forward_matrices(d: &CMatrix, e: &CMatrix, c0: &CVector, svd_threshold: f64) -> Result<FFSolution> {
    FFSolution::closed(d, e, c0.clone(), svd_threshold)
}

/// `<χ_i|O|χ_j>` for one observable, built once and reused for every `c(t)`.
#[derive(Clone, Debug)]
pub struct ObservableMatrix {
    matrix: CMatrix,
}

impl ObservableMatrix {
    pub fn new(sub: &KrylovSubspace, o: &PauliSum) -> Result<Self> {
        Self::from_basis(sub.basis(), o)
    }

    pub fn from_basis(basis: &[StateVector], o: &PauliSum) -> Result<Self> {
        o.require_hermitian()?;
        let applied = basis.iter().map(|chi| o.apply(chi)).collect::<Result<Vec<_>>>()?;
        let m = basis.len();
        let mut matrix = CMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                matrix[(i, j)] = basis[i].inner(&applied[j])?;
            }
        }
        hermitize(&mut matrix);
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Σ_ij c_i* c_j O_ij`; fails if the imaginary part exceeds `1e-8`
    /// relative to the magnitude of the summands.
    pub fn expectation(&self, c: &CVector) -> Result<f64> {
        if c.len() != self.matrix.nrows() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a {}-dimensional observable matrix",
                c.len(),
                self.matrix.nrows()
            )));
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for i in 0..c.len() {
            for j in 0..c.len() {
                let term = c[i].conj() * self.matrix[(i, j)] * c[j];
                value += term;
                scale += term.norm();
            }
        }
        if value.im.abs() > 1e-8 * scale.max(1.0) {
            return Err(Error::ComplexExpectation(value.im));
        }
        Ok(value.re)
    }
}

/// `Σ_ij c_i* c_j <χ_i|O|χ_j>`.
pub fn observable(sub: &KrylovSubspace, o: &PauliSum, c: &CVector) -> Result<f64> {
    ObservableMatrix::new(sub, o)?.expectation(c)
}

/// `(|<exact|ψ_K>|², c† E c)` with `ψ_K = Σ_i c_i χ_i`.
pub fn fidelity(exact: &StateVector, sub: &KrylovSubspace, c: &CVector) -> Result<(f64, f64)> {
    if c.len() != sub.dim() {
        return Err(Error::Dimension(format!(
            "{} coefficients for a {}-dimensional subspace",
            c.len(),
            sub.dim()
        )));
    }
    let mut overlap = Complex64::new(0.0, 0.0);
    for (chi, ck) in sub.basis().iter().zip(c.iter()) {
        overlap += exact.inner(chi)? * ck;
    }
    let norm = (c.adjoint() * sub.e_matrix() * c)[(0, 0)].re;
    Ok((overlap.norm_sqr(), norm))
}
