use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Collapse operator `C = √γ Â`.
#[derive(Clone, Debug, PartialEq)]
pub struct Collapse {
    pub operator: PauliSum,
    pub rate: f64,
}

impl Collapse {
    pub fn new(operator: PauliSum, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "collapse rates must be finite and nonnegative, got {rate}"
            )));
        }
        Ok(Self { operator, rate })
    }

    /// `σ⁻ = |0><1| = (X + iY)/2` on `site` (1-based, qubit 1 leftmost).
    pub fn lowering(n: usize, site: usize, rate: f64) -> Result<Self> {
        Self::new(ladder(n, site, 1.0)?, rate)
    }

    /// `σ⁺ = |1><0| = (X - iY)/2` on `site`.
    pub fn raising(n: usize, site: usize, rate: f64) -> Result<Self> {
        Self::new(ladder(n, site, -1.0)?, rate)
    }

    /// `Z` on `site`.
    pub fn dephasing(n: usize, site: usize, rate: f64) -> Result<Self> {
        let z = PauliString::on_site(n, site, Pauli::Z, Complex64::new(1.0, 0.0))?;
        Self::new(PauliSum::new(n, vec![z])?, rate)
    }

    /// `X`, `Y` and `Z` on `site`, each with rate `γ/3`.
    pub fn depolarizing(n: usize, site: usize, rate: f64) -> Result<Vec<Self>> {
        [Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .map(|p| {
                let s = PauliString::on_site(n, site, p, Complex64::new(1.0, 0.0))?;
                Self::new(PauliSum::new(n, vec![s])?, rate / 3.0)
            })
            .collect()
    }
}

fn ladder(n: usize, site: usize, sign: f64) -> Result<PauliSum> {
    let x = PauliString::on_site(n, site, Pauli::X, Complex64::new(0.5, 0.0))?;
    let y = PauliString::on_site(n, site, Pauli::Y, Complex64::new(0.0, 0.5 * sign))?;
    PauliSum::new(n, vec![x, y])
}

/// System Hamiltonian plus collapse operators.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladSpec {
    pub hamiltonian: PauliSum,
    pub collapses: Vec<Collapse>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: PauliSum, collapses: Vec<Collapse>) -> Result<Self> {
        let spec = Self {
            hamiltonian,
            collapses,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.require_hermitian()?;
        for c in &self.collapses {
            if c.operator.n_qubits() != self.n_qubits() {
                return Err(Error::QubitMismatch {
                    expected: self.n_qubits(),
                    got: c.operator.n_qubits(),
                });
            }
            if !(c.rate >= 0.0) || !c.rate.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "collapse rates must be finite and nonnegative, got {}",
                    c.rate
                )));
            }
        }
        Ok(())
    }
}
