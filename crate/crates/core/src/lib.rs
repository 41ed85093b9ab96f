//! Statevector simulation of quantum Krylov fast-forwarding.
//!
//! Pauli-sum operators act matrix-free on `2^n` amplitude vectors. Krylov
//! subspaces are grown by QDavidson, multi-reference Krylov or
//! multi-reference QDavidson, and the projected Schrödinger equation then
//! propagates subspace coefficients to any time. The same projection runs
//! over vectorized Lindblad generators for open systems.
//!
//! Amplitude kernels run on rayon with the default `parallel` feature and
//! produce bitwise-identical results on the sequential path.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod exec;
pub mod expm;
pub mod krylov;
pub mod lindblad;
pub mod linalg;
pub mod pauli;
pub mod state;

pub use error::{Error, Result};
pub use evolve::{exact_evolve, imaginary_time_apply, trotter_evolve, EvolutionParams};
pub use exec::Exec;
pub use krylov::{
    fast_forward, fidelity, mrk_build, mrqd_build, observable, qdavidson_build, qdavidson_step,
    regularized_solve, residue_norm, KrylovSubspace, QDavidsonParams,
};
pub use linalg::{CMatrix, CVector};
pub use pauli::{heisenberg_xyz, Pauli, PauliString, PauliSum};
pub use state::{Bitstring, StateVector};
