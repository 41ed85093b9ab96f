//! Independent dense oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qkff::{PauliSum, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_matrix(p: char) -> M {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        'I' => M::from_row_slice(2, 2, &[one, o, o, one]),
        'X' => M::from_row_slice(2, 2, &[o, one, one, o]),
        'Y' => M::from_row_slice(2, 2, &[o, -i, i, o]),
        'Z' => M::from_row_slice(2, 2, &[one, o, o, -one]),
        _ => panic!("not a Pauli label: {p}"),
    }
}

/// Kronecker product of single-qubit factors, qubit 1 leftmost.
pub fn kron_string(axes: &str) -> M {
    axes.chars()
        .map(pauli_matrix)
        .reduce(|acc, m| acc.kronecker(&m))
        .expect("non-empty label")
}

pub fn kron_sum(op: &PauliSum) -> M {
    let d = op.dim();
    let mut m = M::zeros(d, d);
    for t in op.terms() {
        m += kron_string(&t.axes_string()) * t.coefficient();
    }
    m
}

/// Heisenberg chain assembled bond by bond from Kronecker products.
pub fn kron_heisenberg(n: usize, jx: f64, jy: f64, jz: f64, h: f64) -> M {
    let d = 1 << n;
    let mut m = M::zeros(d, d);
    let label = |sites: &[(usize, char)]| {
        (0..n)
            .map(|q| sites.iter().find(|(s, _)| *s == q).map_or('I', |(_, p)| *p))
            .collect::<String>()
    };
    for i in 0..n - 1 {
        for (p, j) in [('X', jx), ('Y', jy), ('Z', jz)] {
            m += kron_string(&label(&[(i, p), (i + 1, p)])) * c(j, 0.0);
        }
    }
    for i in 0..n {
        m += kron_string(&label(&[(i, 'Z')])) * c(h, 0.0);
    }
    m
}

/// Taylor series with scaling and squaring.
pub fn taylor_expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * c(scale, 0.0);
    let d = a.nrows();
    let mut out = M::identity(d, d);
    let mut term = M::identity(d, d);
    for k in 1..=24 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

pub fn dense_evolve(h: &M, s: &StateVector, t: f64) -> StateVector {
    let u = taylor_expm(&(h * c(0.0, -t)));
    apply_dense(&u, s)
}

pub fn apply_dense(m: &M, s: &StateVector) -> StateVector {
    let v = nalgebra::DVector::from_column_slice(s.amplitudes());
    StateVector::from_amplitudes(s.n_qubits(), (m * v).as_slice().to_vec()).unwrap()
}

pub fn direct_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for k in 0..a.len() {
        acc += a[k].conj() * b[k];
    }
    acc
}

pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    direct_inner(a.amplitudes(), b.amplitudes()).norm_sqr()
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(n, amps).unwrap().normalized()
}

/// Column-stacked Lindblad generator:
/// `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
pub fn kron_liouvillian(h: &M, collapses: &[(M, f64)]) -> M {
    let d = h.nrows();
    let id = M::identity(d, d);
    let mut l = id.kronecker(h) * c(0.0, -1.0) + h.transpose().kronecker(&id) * c(0.0, 1.0);
    for (op, rate) in collapses {
        let ldl = op.adjoint() * op;
        l += (op.conjugate().kronecker(op) - id.kronecker(&ldl) * c(0.5, 0.0)
            - ldl.transpose().kronecker(&id) * c(0.5, 0.0))
            * c(*rate, 0.0);
    }
    l
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
