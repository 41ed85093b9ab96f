//! Real-time, Trotterized and imaginary-time propagation of statevectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expm::{expmv_hermitian, KrylovOptions};
use crate::pauli::PauliSum;
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    /// Truncation tolerance of the Krylov exponential.
    pub tol: f64,
    pub trotter_steps: usize,
    /// Imaginary-time step of the correction map.
    pub dtau: f64,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            trotter_steps: 40,
            dtau: 0.1,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.dtau > 0.0) || self.trotter_steps == 0 {
            return Err(Error::InvalidArgument(format!(
                "evolution parameters need tol > 0, dtau > 0, trotter_steps ≥ 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

fn check(h: &PauliSum, s: &StateVector) -> Result<()> {
    h.require_hermitian()?;
    if h.n_qubits() != s.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: s.n_qubits(),
        });
    }
    Ok(())
}

/// `exp(-iHt)|s>` to 2-norm accuracy `tol`, matrix-free.
pub fn exact_evolve(h: &PauliSum, s: &StateVector, t: f64, tol: f64) -> Result<StateVector> {
    exact_evolve_with(Exec::default(), h, s, t, &KrylovOptions::with_tol(tol))
}

pub fn exact_evolve_with(
    exec: Exec,
    h: &PauliSum,
    s: &StateVector,
    t: f64,
    opts: &KrylovOptions,
) -> Result<StateVector> {
    check(h, s)?;
    let out = expmv_hermitian(
        exec,
        |x, y| h.apply_slice(exec, x, y),
        s.amplitudes(),
        Complex64::new(0.0, -t),
        opts,
    )?;
    StateVector::from_amplitudes(s.n_qubits(), out)
}

/// First-order product formula `(Π_j exp(-i c_j P_j t/steps))^steps` with
/// the terms in stored order.
pub fn trotter_evolve(h: &PauliSum, s: &StateVector, t: f64, steps: usize) -> Result<StateVector> {
    check(h, s)?;
    if steps == 0 {
        return Err(Error::InvalidArgument("Trotter evolution needs at least one step".into()));
    }
    let dt = t / steps as f64;
    let mut out = s.clone();
    for _ in 0..steps {
        for term in h.terms() {
            term.apply_rotation(term.coefficient().re * dt, out.amplitudes_mut());
        }
    }
    Ok(out)
}

/// Unnormalized `exp(-Δτ (H - shift))|s>`.
pub fn imaginary_time_apply(
    h: &PauliSum,
    shift: f64,
    dtau: f64,
    s: &StateVector,
    tol: f64,
) -> Result<StateVector> {
    check(h, s)?;
    if !(dtau > 0.0) {
        return Err(Error::InvalidArgument(format!("dtau must be positive, got {dtau}")));
    }
    let exec = Exec::default();
    let out = expmv_hermitian(
        exec,
        |x, y| {
            h.apply_slice(exec, x, y);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi -= shift * xi;
            }
        },
        s.amplitudes(),
        Complex64::new(-dtau, 0.0),
        &KrylovOptions::with_tol(tol),
    )?;
    StateVector::from_amplitudes(s.n_qubits(), out)
}
