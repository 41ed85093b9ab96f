//! Restarted Krylov approximations of `exp(z·A)·v` for matrix-free `A`.
//!
//! Each restart builds one Krylov basis from the current vector and then
//! advances by the largest fraction of the remaining exponent whose a
//! posteriori error estimate `β · h_{m+1,m} · |e_m^T exp(s z H_m) e_1|`
//! stays below `tol · s · β`. Segment errors therefore sum to at most
//! `tol` relative to the vector norm.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{expm, CMatrix};
use crate::state::inner_slices;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Basis size per restart.
    pub krylov_dim: usize,
    /// Target 2-norm error relative to the input norm.
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 30,
            tol: 1e-12,
            max_restarts: 100_000,
        }
    }
}

impl KrylovOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.krylov_dim == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Krylov options need krylov_dim > 0 and tol > 0 (got {} and {})",
                self.krylov_dim, self.tol
            )));
        }
        Ok(())
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn norm(exec: Exec, v: &[Complex64]) -> f64 {
    inner_slices(exec, v, v).re.max(0.0).sqrt()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

/// Orthogonalize `u` against `basis` twice (classical Gram–Schmidt with one
/// reorthogonalization pass) and return the accumulated coefficients.
fn orthogonalize(exec: Exec, basis: &[Vec<Complex64>], u: &mut [Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![ZERO; basis.len()];
    for _ in 0..2 {
        for (k, v) in basis.iter().enumerate() {
            let h = inner_slices(exec, v, u);
            axpy(u, -h, v);
            coeffs[k] += h;
        }
    }
    coeffs
}

fn combine(basis: &[Vec<Complex64>], y: &[Complex64], scale: f64) -> Vec<Complex64> {
    let mut out = vec![ZERO; basis[0].len()];
    for (v, &c) in basis.iter().zip(y) {
        axpy(&mut out, c * scale, v);
    }
    out
}

/// Step-size search shared by both variants: `eval(s)` returns the small
/// exponential applied to `e_1` and the residual estimate is read from its
/// last entry.
fn choose_step<F>(remaining: f64, beta: f64, coupling: f64, tol: f64, eval: F) -> Option<(f64, Vec<Complex64>)>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let mut s = remaining;
    loop {
        let y = eval(s);
        let err = beta * coupling * y.last().map_or(0.0, |c| c.norm());
        if coupling == 0.0 || err <= tol * s * beta {
            return Some((s, y));
        }
        s *= 0.5;
        if s < remaining * 1e-14 {
            return None;
        }
    }
}

/// `exp(z·A)·v` for Hermitian `A`, via restarted Lanczos with full
/// reorthogonalization.
pub fn expmv_hermitian<F>(
    exec: Exec,
    apply: F,
    v: &[Complex64],
    z: Complex64,
    opts: &KrylovOptions,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    opts.validate()?;
    let dim = v.len();
    let mut w = v.to_vec();
    if z == ZERO {
        return Ok(w);
    }
    let mut remaining = 1.0f64;
    let mut restarts = 0usize;
    let mut u = vec![ZERO; dim];
    while remaining > 0.0 {
        let beta = norm(exec, &w);
        if beta == 0.0 {
            return Ok(w);
        }
        let m = opts.krylov_dim.min(dim);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(w.iter().map(|a| a / beta).collect());
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut offdiag: Vec<f64> = Vec::with_capacity(m);
        let mut scale = 0.0f64;
        let mut coupling = 0.0f64;
        for j in 0..m {
            apply(&basis[j], &mut u);
            let coeffs = orthogonalize(exec, &basis, &mut u);
            let a = coeffs[j].re;
            alpha.push(a);
            let b = norm(exec, &u);
            scale = scale.max(a.abs()).max(b);
            if b <= 1e-13 * scale.max(1e-300) {
                // invariant subspace: the projection is exact
                coupling = 0.0;
                break;
            }
            if j + 1 == m {
                coupling = b;
                break;
            }
            offdiag.push(b);
            basis.push(u.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        basis.truncate(k);
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = offdiag[i];
                t[(i + 1, i)] = offdiag[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let eval = |s: f64| -> Vec<Complex64> {
            // Q exp(s z Θ) Q^T e_1
            let weights: Vec<Complex64> = (0..k)
                .map(|p| (z * s * eig.eigenvalues[p]).exp() * eig.eigenvectors[(0, p)])
                .collect();
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|p| weights[p] * eig.eigenvectors[(i, p)])
                        .fold(ZERO, |acc, x| acc + x)
                })
                .collect()
        };
        let (s, y) = choose_step(remaining, beta, coupling, opts.tol, eval).ok_or(
            Error::NoConvergence {
                what: "Lanczos exponential step size",
                limit: restarts,
            },
        )?;
        w = combine(&basis, &y, beta);
        remaining = if coupling == 0.0 { 0.0 } else { remaining - s };
        if remaining <= 1e-15 {
            break;
        }
        restarts += 1;
        if restarts > opts.max_restarts {
            return Err(Error::NoConvergence {
                what: "Lanczos exponential",
                limit: opts.max_restarts,
            });
        }
    }
    Ok(w)
}

/// `exp(z·A)·v` for a general (non-Hermitian) `A`, via restarted Arnoldi.
pub fn expmv_general<F>(
    exec: Exec,
    apply: F,
    v: &[Complex64],
    z: Complex64,
    opts: &KrylovOptions,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    opts.validate()?;
    let dim = v.len();
    let mut w = v.to_vec();
    if z == ZERO {
        return Ok(w);
    }
    let mut remaining = 1.0f64;
    let mut restarts = 0usize;
    let mut u = vec![ZERO; dim];
    while remaining > 0.0 {
        let beta = norm(exec, &w);
        if beta == 0.0 {
            return Ok(w);
        }
        let m = opts.krylov_dim.min(dim);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(w.iter().map(|a| a / beta).collect());
        let mut hess = CMatrix::zeros(m + 1, m);
        let mut scale = 0.0f64;
        let mut coupling = 0.0f64;
        let mut k = 0;
        for j in 0..m {
            apply(&basis[j], &mut u);
            let coeffs = orthogonalize(exec, &basis, &mut u);
            for (i, c) in coeffs.iter().enumerate() {
                hess[(i, j)] = *c;
                scale = scale.max(c.norm());
            }
            let b = norm(exec, &u);
            k = j + 1;
            scale = scale.max(b);
            if b <= 1e-13 * scale.max(1e-300) {
                coupling = 0.0;
                break;
            }
            if j + 1 == m {
                coupling = b;
                break;
            }
            hess[(j + 1, j)] = Complex64::new(b, 0.0);
            basis.push(u.iter().map(|x| x / b).collect());
        }
        basis.truncate(k);
        let hk = hess.view((0, 0), (k, k)).into_owned();
        let eval = |s: f64| -> Vec<Complex64> {
            let e = expm(&(&hk * (z * s)));
            e.column(0).iter().copied().collect()
        };
        let (s, y) = choose_step(remaining, beta, coupling, opts.tol, eval).ok_or(
            Error::NoConvergence {
                what: "Arnoldi exponential step size",
                limit: restarts,
            },
        )?;
        w = combine(&basis, &y, beta);
        remaining = if coupling == 0.0 { 0.0 } else { remaining - s };
        if remaining <= 1e-15 {
            break;
        }
        restarts += 1;
        if restarts > opts.max_restarts {
            return Err(Error::NoConvergence {
                what: "Arnoldi exponential",
                limit: opts.max_restarts,
            });
        }
    }
    Ok(w)
}
