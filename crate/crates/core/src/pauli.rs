//! Weighted Pauli strings and their matrix-free action on statevectors.
//!
//! Qubit 1 is the most significant bit of a basis-state label, so the
//! bitstring `"0101"` reads left to right as qubits 1..N.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::state::StateVector;

/// Default qubit cap for [`PauliSum::to_dense`].
pub const DENSE_CAP: usize = 8;

/// Coefficients with an imaginary part below this are treated as real.
const HERMITIAN_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Matrix element `<row|σ|col>` of the single-qubit matrix.
    pub fn element(self, row: usize, col: usize) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match (self, row, col) {
            (Pauli::I, r, c) if r == c => one,
            (Pauli::X, r, c) if r != c => one,
            (Pauli::Y, 0, 1) => Complex64::new(0.0, -1.0),
            (Pauli::Y, 1, 0) => Complex64::new(0.0, 1.0),
            (Pauli::Z, 0, 0) => one,
            (Pauli::Z, 1, 1) => -one,
            _ => zero,
        }
    }
}

/// A single weighted Pauli string `coefficient · σ_1 ⊗ … ⊗ σ_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    axes: Vec<Pauli>,
    coefficient: Complex64,
    // bit b set for qubit (n - b): X or Y flips, Z or Y phases
    x_mask: usize,
    z_mask: usize,
    // i^(number of Y factors)
    y_phase: Complex64,
}

impl PauliString {
    pub fn new(axes: Vec<Pauli>, coefficient: Complex64) -> Self {
        let n = axes.len();
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut n_y = 0u32;
        for (q, p) in axes.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        let y_phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self {
            axes,
            coefficient,
            x_mask,
            z_mask,
            y_phase,
        }
    }

    /// Parse an axes string such as `"XIZY"`.
    pub fn parse(axes: &str, coefficient: Complex64) -> Result<Self> {
        let parsed: Option<Vec<Pauli>> = axes.chars().map(Pauli::from_char).collect();
        match parsed {
            Some(v) if !v.is_empty() => Ok(Self::new(v, coefficient)),
            _ => Err(Error::ParsePauli(axes.to_string())),
        }
    }

    /// `coefficient · P` acting on one site (1-based) of an `n`-qubit register.
    pub fn on_site(n: usize, site: usize, p: Pauli, coefficient: Complex64) -> Result<Self> {
        if site == 0 || site > n {
            return Err(Error::InvalidArgument(format!(
                "site {site} outside 1..={n}"
            )));
        }
        let mut axes = vec![Pauli::I; n];
        axes[site - 1] = p;
        Ok(Self::new(axes, coefficient))
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn axes_string(&self) -> String {
        self.axes.iter().map(|p| p.as_char()).collect()
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn with_coefficient(&self, coefficient: Complex64) -> Self {
        Self {
            coefficient,
            ..self.clone()
        }
    }

    /// True when every factor is I or Z.
    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    pub(crate) fn flip_mask(&self) -> usize {
        self.x_mask
    }

    /// Unit-coefficient phase `f(b)` with `P|b> = f(b)|b ^ x_mask>`.
    #[inline]
    pub(crate) fn phase(&self, b: usize) -> Complex64 {
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }

    /// Apply `exp(-i θ P)` in place (unit-coefficient `P`, real `θ`) using
    /// `cos θ · I - i sin θ · P`.
    pub fn apply_rotation(&self, theta: f64, amps: &mut [Complex64]) {
        let (s, c) = theta.sin_cos();
        let x = self.x_mask;
        let minus_i_sin = Complex64::new(0.0, -s);
        if x == 0 {
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= c + minus_i_sin * self.phase(b);
            }
            return;
        }
        // pair (b, b ^ x) with b holding the lower index of the pair
        let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..amps.len() {
            if b & top != 0 {
                continue;
            }
            let partner = b ^ x;
            let lo = amps[b];
            let hi = amps[partner];
            amps[b] = lo * c + minus_i_sin * self.phase(partner) * hi;
            amps[partner] = hi * c + minus_i_sin * self.phase(b) * lo;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}{:+}i)·{}",
            self.coefficient.re,
            self.coefficient.im,
            self.axes_string()
        )
    }
}

/// Sum of Pauli strings on a common register. Terms are kept exactly as
/// built; no merging.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a register needs at least one qubit".into()));
        }
        if n_qubits >= usize::BITS as usize - 1 {
            return Err(Error::InvalidArgument(format!("{n_qubits} qubits is too many")));
        }
        for t in &terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch {
                    expected: n_qubits,
                    got: t.n_qubits(),
                });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// The zero operator.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    /// Build from `(axes, re, im)` triples, the configuration-file form.
    pub fn from_triples<S: AsRef<str>>(triples: &[(S, f64, f64)]) -> Result<Self> {
        let first = triples
            .first()
            .ok_or_else(|| Error::InvalidArgument("operator has no terms".into()))?;
        let n = first.0.as_ref().chars().count();
        let terms = triples
            .iter()
            .map(|(axes, re, im)| PauliString::parse(axes.as_ref(), Complex64::new(*re, *im)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms)
    }

    /// A single-term sum.
    pub fn single(axes: &str, coefficient: f64) -> Result<Self> {
        Self::from_triples(&[(axes, coefficient, 0.0)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: term.n_qubits(),
            });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.coefficient.im.abs() <= HERMITIAN_TOL)
    }

    pub fn require_hermitian(&self) -> Result<()> {
        match self
            .terms
            .iter()
            .position(|t| t.coefficient.im.abs() > HERMITIAN_TOL)
        {
            None => Ok(()),
            Some(term) => Err(Error::NotHermitian {
                term,
                re: self.terms[term].coefficient.re,
                im: self.terms[term].coefficient.im,
            }),
        }
    }

    /// Hermitian adjoint: every Pauli string is Hermitian, so only the
    /// coefficients are conjugated.
    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coefficient(t.coefficient.conj()))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coefficient(t.coefficient * factor))
                .collect(),
        }
    }

    /// Sum of `|coefficient|`, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).sum()
    }

    fn check_register(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: n,
            });
        }
        Ok(())
    }

    /// `op · s`, matrix-free.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.apply_with(Exec::default(), s)
    }

    pub fn apply_with(&self, exec: Exec, s: &StateVector) -> Result<StateVector> {
        self.check_register(s.n_qubits())?;
        let mut out = vec![Complex64::new(0.0, 0.0); s.dim()];
        self.apply_slice(exec, s.amplitudes(), &mut out);
        StateVector::from_amplitudes(self.n_qubits, out)
    }

    /// Gather form: `out[b] = Σ_t c_t f_t(b ^ x_t) input[b ^ x_t]`. Each
    /// output amplitude is independent, so the parallel path is exact.
    pub(crate) fn apply_slice(&self, exec: Exec, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), out.len());
        exec.fill(out, |b| {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &self.terms {
                let src = b ^ t.x_mask;
                acc += t.coefficient * t.phase(src) * input[src];
            }
            acc
        });
    }

    /// Dense `2^n × 2^n` matrix, entry by entry from the single-qubit
    /// factors.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_capped(DENSE_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::OracleCap {
                n: self.n_qubits,
                cap,
            });
        }
        let n = self.n_qubits;
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            for row in 0..dim {
                for col in 0..dim {
                    let mut v = t.coefficient;
                    for (q, p) in t.axes.iter().enumerate() {
                        let shift = n - 1 - q;
                        v *= p.element((row >> shift) & 1, (col >> shift) & 1);
                        if v == Complex64::new(0.0, 0.0) {
                            break;
                        }
                    }
                    m[(row, col)] += v;
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next().and_then(Pauli::from_char), chars.next()) {
            (Some(p), None) => Ok(p),
            _ => Err(Error::ParsePauli(s.to_string())),
        }
    }
}

/// Open-boundary Heisenberg XYZ chain with a uniform Z field.
///
/// Terms are ordered bond by bond (XX, YY, ZZ on sites i, i+1) followed by
/// the field on every site; Trotter products use this order.
pub fn heisenberg_xyz(n: usize, jx: f64, jy: f64, jz: f64, h: f64) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Heisenberg chain needs at least 2 qubits, got {n}"
        )));
    }
    let mut terms = Vec::with_capacity(4 * n - 3);
    for i in 0..n - 1 {
        for (p, j) in [(Pauli::X, jx), (Pauli::Y, jy), (Pauli::Z, jz)] {
            let mut axes = vec![Pauli::I; n];
            axes[i] = p;
            axes[i + 1] = p;
            terms.push(PauliString::new(axes, Complex64::new(j, 0.0)));
        }
    }
    for i in 0..n {
        let mut axes = vec![Pauli::I; n];
        axes[i] = Pauli::Z;
        terms.push(PauliString::new(axes, Complex64::new(h, 0.0)));
    }
    PauliSum::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn heisenberg_term_count_and_order() {
        let h = heisenberg_xyz(8, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(h.len(), 3 * 7 + 8);
        assert!(h.is_hermitian());
        assert_eq!(h.terms()[0].axes_string(), "XXIIIIII");
        assert_eq!(h.terms()[1].axes_string(), "YYIIIIII");
        assert_eq!(h.terms()[2].axes_string(), "ZZIIIIII");
        assert_eq!(h.terms()[3].axes_string(), "IXXIIIII");
        assert_eq!(h.terms()[21].axes_string(), "ZIIIIIII");
        assert_eq!(h.terms()[28].axes_string(), "IIIIIIIZ");
    }

    #[test]
    fn heisenberg_rejects_single_qubit() {
        assert!(matches!(
            heisenberg_xyz(1, 1.0, 1.0, 1.0, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zz_dense_is_parity_diagonal() {
        let h = heisenberg_xyz(2, 0.0, 0.0, 1.0, 0.0).unwrap();
        let d = h.to_dense().unwrap();
        let expected = [1.0, -1.0, -1.0, 1.0];
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col { expected[r] } else { 0.0 };
                assert_eq!(d[(r, col)], c(want));
            }
        }
    }

    #[test]
    fn single_qubit_dense_forms() {
        let z = PauliSum::single("Z", 1.0).unwrap().to_dense().unwrap();
        assert_eq!(z[(0, 0)], c(1.0));
        assert_eq!(z[(1, 1)], c(-1.0));
        assert_eq!(z[(0, 1)], c(0.0));
        let x = PauliSum::single("X", 1.0).unwrap().to_dense().unwrap();
        assert_eq!(x[(0, 1)], c(1.0));
        assert_eq!(x[(1, 0)], c(1.0));
        assert_eq!(x[(0, 0)], c(0.0));
        let y = PauliSum::single("Y", 1.0).unwrap().to_dense().unwrap();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn x_on_qubit_one_flips_most_significant_bit() {
        let x1 = PauliSum::single("XI", 1.0).unwrap();
        let s = StateVector::basis(2, 0).unwrap();
        let out = x1.apply(&s).unwrap();
        // |10> has index 2
        assert_eq!(out.amplitudes()[2], c(1.0));
        assert_eq!(out.amplitudes()[0], c(0.0));
    }

    #[test]
    fn z_on_qubit_one_of_neel_is_plus_one() {
        let n = 6;
        let mut axes = vec![Pauli::I; n];
        axes[0] = Pauli::Z;
        let z1 = PauliSum::new(n, vec![PauliString::new(axes, c(1.0))]).unwrap();
        let neel = StateVector::neel(n).unwrap();
        let out = z1.apply(&neel).unwrap();
        assert_eq!(out.amplitudes(), neel.amplitudes());
    }

    #[test]
    fn register_mismatch_is_rejected() {
        let h = heisenberg_xyz(3, 1.0, 1.0, 1.0, 1.0).unwrap();
        let s = StateVector::neel(4).unwrap();
        assert!(matches!(h.apply(&s), Err(Error::QubitMismatch { .. })));
    }

    #[test]
    fn dense_cap_enforced() {
        let h = heisenberg_xyz(9, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(h.to_dense(), Err(Error::OracleCap { n: 9, cap: 8 })));
    }

    #[test]
    fn parse_rejects_bad_axes() {
        assert!(PauliString::parse("XQZ", c(1.0)).is_err());
        assert!(PauliString::parse("", c(1.0)).is_err());
        assert!(PauliSum::from_triples(&[("XX", 1.0, 0.0), ("XXX", 1.0, 0.0)]).is_err());
    }

    #[test]
    fn complex_coefficients_are_not_hermitian() {
        let op = PauliSum::from_triples(&[("X", 1.0, 0.5)]).unwrap();
        assert!(!op.is_hermitian());
        assert!(matches!(op.require_hermitian(), Err(Error::NotHermitian { term: 0, .. })));
        assert!(op.adjoint().terms()[0].coefficient().im < 0.0);
    }

    #[test]
    fn rotation_matches_closed_form() {
        // exp(-iθX)|0> = cos θ|0> - i sin θ|1>
        let x = PauliString::parse("X", c(1.0)).unwrap();
        let mut amps = vec![c(1.0), c(0.0)];
        x.apply_rotation(0.3, &mut amps);
        assert!((amps[0] - c(0.3f64.cos())).norm() < 1e-15);
        assert!((amps[1] - Complex64::new(0.0, -(0.3f64.sin()))).norm() < 1e-15);
    }
}
