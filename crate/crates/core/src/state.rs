//! Statevectors, bitstring labels and reference selection.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Computational-basis label of an `n`-qubit register. Qubit 1 is the
/// leftmost character and the most significant bit of `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bitstring {
    n: usize,
    value: usize,
}

impl Bitstring {
    pub fn new(n: usize, value: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize - 1 || value >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "value {value} is not an {n}-qubit basis label"
            )));
        }
        Ok(Self { n, value })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn value(&self) -> usize {
        self.value
    }

    /// The alternating label `0101…` starting from 0 at qubit 1.
    pub fn neel(n: usize) -> Result<Self> {
        let value = (0..n).fold(0usize, |acc, q| (acc << 1) | (q % 2));
        Self::new(n, value)
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            let bit = (self.value >> (self.n - 1 - q)) & 1;
            write!(f, "{bit}")?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::ParseBitstring(s.to_string()));
        }
        let mut value = 0usize;
        for ch in s.chars() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::ParseBitstring(s.to_string())),
            };
            value = (value << 1) | bit;
        }
        Self::new(s.len(), value).map_err(|_| Error::ParseBitstring(s.to_string()))
    }
}

/// `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Serialized form: qubit count plus `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct StateRepr {
    n_qubits: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl From<StateVector> for StateRepr {
    fn from(s: StateVector) -> Self {
        StateRepr {
            n_qubits: s.n,
            amplitudes: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateRepr> for StateVector {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        let amps = r
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        StateVector::from_amplitudes(r.n_qubits, amps)
    }
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize - 1 {
            return Err(Error::InvalidArgument(format!("invalid qubit count {n}")));
        }
        if amps.len() != 1usize << n {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n} qubits (expected {})",
                amps.len(),
                1usize << n
            )));
        }
        Ok(Self { n, amps })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize - 1 {
            return Err(Error::InvalidArgument(format!("invalid qubit count {n}")));
        }
        Ok(Self {
            n,
            amps: vec![Complex64::new(0.0, 0.0); 1usize << n],
        })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let label = Bitstring::new(n, index)?;
        Ok(Self::from_bitstring(label))
    }

    pub fn from_bitstring(label: Bitstring) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << label.n];
        amps[label.value] = Complex64::new(1.0, 0.0);
        Self { n: label.n, amps }
    }

    /// The Néel state `|0101…>`.
    pub fn neel(n: usize) -> Result<Self> {
        Ok(Self::from_bitstring(Bitstring::neel(n)?))
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.n != other.n {
            return Err(Error::QubitMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(inner_slices(Exec::default(), &self.amps, &other.amps))
    }

    pub fn norm_sqr(&self) -> f64 {
        inner_slices(Exec::default(), &self.amps, &self.amps).re
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scale to unit norm and return the previous norm. A zero vector is
    /// left untouched.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            self.scale(Complex64::new(1.0 / norm, 0.0));
        }
        norm
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: Complex64, other: &StateVector) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// `Σ_k coeffs[k] · vectors[k]`.
    pub fn combination(vectors: &[StateVector], coeffs: &[Complex64]) -> Result<StateVector> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::Dimension("empty combination".into()))?;
        if coeffs.len() != vectors.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} vectors",
                coeffs.len(),
                vectors.len()
            )));
        }
        let mut out = StateVector::zeros(first.n)?;
        for (v, &c) in vectors.iter().zip(coeffs) {
            out.axpy(c, v)?;
        }
        Ok(out)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Most probable basis label outside `excluded`; ties go to the smallest
    /// label.
    pub fn argmax_bitstring(&self, excluded: &BTreeSet<Bitstring>) -> Result<Bitstring> {
        let mut best: Option<(usize, f64)> = None;
        for (i, a) in self.amps.iter().enumerate() {
            let label = Bitstring { n: self.n, value: i };
            if excluded.contains(&label) {
                continue;
            }
            let p = a.norm_sqr();
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((i, p));
            }
        }
        best.map(|(value, _)| Bitstring { n: self.n, value })
            .ok_or(Error::AllExcluded(self.dim()))
    }

    /// Little-endian `(re, im)` f64 pairs.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * self.amps.len());
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        Self::from_amplitudes(n, complex_from_le_bytes(bytes)?)
    }
}

pub(crate) fn complex_from_le_bytes(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Dimension(format!(
            "{} bytes is not a whole number of complex values",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

/// Free-function form of [`StateVector::inner`].
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner(b)
}

pub(crate) fn inner_slices(exec: Exec, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    exec.sum(a.len(), |r| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in r {
            acc += a[i].conj() * b[i];
        }
        acc
    })
}
