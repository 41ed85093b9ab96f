use num_complex::Complex64;

use super::density::DensityVector;
use super::spec::LindbladSpec;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::CMatrix;
use crate::pauli::PauliSum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense superoperators are built only up to this many qubits.
pub const LIOUVILLIAN_DENSE_CAP: usize = 3;

/// A piece of the generator, for splittings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Full,
    /// `-iI⊗H + iHᵀ⊗I`, i.e. `ρ ↦ -i[H, ρ]`.
    Unitary,
    /// Whole dissipator of collapse `k`.
    Dissipator(usize),
    /// `-½γ(I⊗L†L + (LᵀL̄)⊗I)`, i.e. `ρ ↦ -½γ{L†L, ρ}`.
    Contraction(usize),
    /// `γ L̄⊗L`, i.e. `ρ ↦ γ L ρ L†`.
    Jump(usize),
}

/// Matrix-free Lindblad generator on column-stacked density vectors.
#[derive(Clone, Debug)]
pub struct LiouvillianOp {
    spec: LindbladSpec,
    adjoints: Vec<PauliSum>,
    exec: Exec,
}

pub fn build_liouvillian(spec: &LindbladSpec) -> Result<LiouvillianOp> {
    spec.validate()?;
    Ok(LiouvillianOp {
        adjoints: spec.collapses.iter().map(|c| c.operator.adjoint()).collect(),
        spec: spec.clone(),
        exec: Exec::default(),
    })
}

/// `out = op · ρ`.
fn left_mul(exec: Exec, op: &PauliSum, n: usize, rho: &[Complex64], out: &mut [Complex64]) {
    let mask = (1usize << n) - 1;
    exec.fill(out, |k| {
        let (i, j) = (k & mask, k >> n);
        let mut acc = ZERO;
        for t in op.terms() {
            let src = i ^ t.flip_mask();
            acc += t.coefficient() * t.phase(src) * rho[src | (j << n)];
        }
        acc
    });
}

/// `out = ρ · op`.
fn right_mul(exec: Exec, op: &PauliSum, n: usize, rho: &[Complex64], out: &mut [Complex64]) {
    let mask = (1usize << n) - 1;
    exec.fill(out, |k| {
        let (i, j) = (k & mask, k >> n);
        let mut acc = ZERO;
        for t in op.terms() {
            acc += t.coefficient() * t.phase(j) * rho[i | ((j ^ t.flip_mask()) << n)];
        }
        acc
    });
}

impl LiouvillianOp {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn spec(&self) -> &LindbladSpec {
        &self.spec
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits()
    }

    /// Liouville-space dimension `4^n`.
    pub fn dim(&self) -> usize {
        1 << (2 * self.n_qubits())
    }

    pub fn n_collapses(&self) -> usize {
        self.spec.collapses.len()
    }

    pub(crate) fn exec(&self) -> Exec {
        self.exec
    }

    fn check(&self, v: &DensityVector) -> Result<()> {
        if v.n_qubits() != self.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits(),
                got: v.n_qubits(),
            });
        }
        Ok(())
    }

    fn check_part(&self, part: Part) -> Result<()> {
        match part {
            Part::Dissipator(k) | Part::Contraction(k) | Part::Jump(k) if k >= self.n_collapses() => {
                Err(Error::InvalidArgument(format!(
                    "collapse index {k} out of range ({} collapses)",
                    self.n_collapses()
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, v: &DensityVector) -> Result<DensityVector> {
        self.apply_part(Part::Full, v)
    }

    pub fn apply_part(&self, part: Part, v: &DensityVector) -> Result<DensityVector> {
        self.check(v)?;
        self.check_part(part)?;
        let mut out = vec![ZERO; v.amplitudes().len()];
        self.apply_slice(part, v.amplitudes(), &mut out);
        DensityVector::from_amplitudes(self.n_qubits(), out)
    }

    /// `out = part · input` on raw column-stacked slices.
    pub(crate) fn apply_slice(&self, part: Part, input: &[Complex64], out: &mut [Complex64]) {
        match part {
            Part::Full => {
                self.apply_slice(Part::Unitary, input, out);
                let mut tmp = vec![ZERO; input.len()];
                for k in 0..self.n_collapses() {
                    self.apply_slice(Part::Dissipator(k), input, &mut tmp);
                    out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
                }
            }
            Part::Unitary => {
                self.commutator_slice(input, out);
                out.iter_mut().for_each(|o| *o *= Complex64::new(0.0, -1.0));
            }
            Part::Dissipator(k) => {
                self.apply_slice(Part::Contraction(k), input, out);
                let mut tmp = vec![ZERO; input.len()];
                self.apply_slice(Part::Jump(k), input, &mut tmp);
                out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
            }
            Part::Contraction(k) => {
                let (n, exec) = (self.n_qubits(), self.exec);
                let c = &self.spec.collapses[k];
                let adj = &self.adjoints[k];
                let mut a = vec![ZERO; input.len()];
                let mut b = vec![ZERO; input.len()];
                left_mul(exec, &c.operator, n, input, &mut a);
                left_mul(exec, adj, n, &a, out);
                right_mul(exec, adj, n, input, &mut a);
                right_mul(exec, &c.operator, n, &a, &mut b);
                let f = -0.5 * c.rate;
                out.iter_mut().zip(&b).for_each(|(o, x)| *o = (*o + x) * f);
            }
            Part::Jump(k) => {
                let (n, exec) = (self.n_qubits(), self.exec);
                let c = &self.spec.collapses[k];
                let mut a = vec![ZERO; input.len()];
                left_mul(exec, &c.operator, n, input, &mut a);
                right_mul(exec, &self.adjoints[k], n, &a, out);
                out.iter_mut().for_each(|o| *o *= c.rate);
            }
        }
    }

    /// `out = [H, ρ]`, Hermitian in the Liouville inner product.
    pub(crate) fn commutator_slice(&self, input: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_qubits();
        let h = &self.spec.hamiltonian;
        let mut tmp = vec![ZERO; input.len()];
        left_mul(self.exec, h, n, input, out);
        right_mul(self.exec, h, n, input, &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o -= t);
    }

    /// Dense `4^n × 4^n` matrix of `part`, column by column.
    pub fn to_dense_part(&self, part: Part) -> Result<CMatrix> {
        let n = self.n_qubits();
        if n > LIOUVILLIAN_DENSE_CAP {
            return Err(Error::OracleCap {
                n,
                cap: LIOUVILLIAN_DENSE_CAP,
            });
        }
        self.check_part(part)?;
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        let mut unit = vec![ZERO; dim];
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            unit[j] = Complex64::new(1.0, 0.0);
            self.apply_slice(part, &unit, &mut col);
            unit[j] = ZERO;
            m.column_mut(j).copy_from_slice(&col);
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        self.to_dense_part(Part::Full)
    }
}
