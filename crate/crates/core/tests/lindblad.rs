mod common;

use common::*;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use qkff::lindblad::*;
use qkff::{exact_evolve, heisenberg_xyz, CMatrix, CVector, PauliSum, StateVector};

fn sigma_minus() -> M {
    M::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

fn damping(gamma: f64, h: PauliSum) -> LiouvillianOp {
    let spec = LindbladSpec::new(h, vec![Collapse::lowering(1, 1, gamma).unwrap()]).unwrap();
    build_liouvillian(&spec).unwrap()
}

fn dephased_xxx(gamma: f64) -> (LindbladSpec, LiouvillianOp) {
    let h = heisenberg_xyz(2, 1.0, 1.0, 1.0, 1.0).unwrap();
    let collapses = (1..=2).map(|q| Collapse::dephasing(2, q, gamma).unwrap()).collect();
    let spec = LindbladSpec::new(h, collapses).unwrap();
    let l = build_liouvillian(&spec).unwrap();
    (spec, l)
}

fn kron_of(spec: &LindbladSpec) -> M {
    let collapses: Vec<(M, f64)> = spec.collapses.iter().map(|k| (kron_sum(&k.operator), k.rate)).collect();
    kron_liouvillian(&kron_sum(&spec.hamiltonian), &collapses)
}

fn excited() -> DensityVector {
    DensityVector::from_pure(&StateVector::basis(1, 1).unwrap())
}

fn frobenius(a: &DensityVector, b: &DensityVector) -> f64 {
    a.distance(b).unwrap()
}

#[test]
fn vectorization_stacks_columns() {
    let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
    let v = vectorize(&half).unwrap();
    assert_eq!(v.amplitudes(), &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
    let mut ket_bra = CMatrix::zeros(2, 2);
    ket_bra[(0, 1)] = c(1.0, 0.0);
    let v = vectorize(&ket_bra).unwrap();
    // (row 0, column 1) sits at 0 + 1·2
    assert_eq!(v.amplitudes()[2], c(1.0, 0.0));
    assert_eq!(v.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
    assert!(vectorize(&CMatrix::zeros(2, 3)).is_err());
}

#[test]
fn vectorization_round_trips_exactly() {
    let mut r = rng(4);
    let a = random_state(4, &mut r);
    let m = M::from_fn(4, 4, |i, j| a.amplitudes()[i * 4 + j]);
    let herm = &m + m.adjoint();
    assert_eq!(devectorize(&vectorize(&herm).unwrap()), herm);
}

#[test]
fn pure_damping_spectrum() {
    let gamma = 0.37;
    let l = damping(gamma, PauliSum::zero(1).unwrap()).to_dense().unwrap();
    assert!(max_diff(&l, &kron_liouvillian(&M::zeros(2, 2), &[(sigma_minus(), gamma)])) < 1e-14);
    // the damping generator is real
    assert!(l.iter().all(|z| z.im == 0.0));
    let mut ev: Vec<f64> = l.map(|z| z.re).complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip([-gamma, -gamma / 2.0, -gamma / 2.0, 0.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn dephased_chain_equals_kronecker_assembly() {
    let (spec, l) = dephased_xxx(0.2);
    assert!(max_diff(&l.to_dense().unwrap(), &kron_of(&spec)) < 1e-12);
}

#[test]
fn mixed_collapses_on_three_qubits_equal_kronecker_assembly() {
    let h = heisenberg_xyz(3, 0.7, -0.2, 1.3, 0.5).unwrap();
    let mut collapses = vec![
        Collapse::lowering(3, 1, 0.3).unwrap(),
        Collapse::raising(3, 2, 0.05).unwrap(),
        Collapse::dephasing(3, 3, 0.1).unwrap(),
        Collapse::new(PauliSum::from_triples(&[("XIZ", 0.4, 0.0), ("IYI", 0.0, -0.2)]).unwrap(), 0.6).unwrap(),
    ];
    collapses.extend(Collapse::depolarizing(3, 2, 0.09).unwrap());
    let spec = LindbladSpec::new(h, collapses).unwrap();
    let l = build_liouvillian(&spec).unwrap();
    assert!(max_diff(&l.to_dense().unwrap(), &kron_of(&spec)) < 1e-12);
}

#[test]
fn dense_liouvillian_respects_the_cap() {
    let h = heisenberg_xyz(4, 1.0, 1.0, 1.0, 1.0).unwrap();
    let l = build_liouvillian(&LindbladSpec::new(h, vec![]).unwrap()).unwrap();
    assert!(l.to_dense().is_err());
}

#[test]
fn amplitude_damping_decays_exponentially() {
    let gamma = 0.5;
    let l = damping(gamma, PauliSum::zero(1).unwrap());
    for t in [0.5, 1.0, 3.0, 7.0] {
        let rho = lindblad_exact_propagate(&l, &excited(), t, 1e-13).unwrap();
        assert!((rho.entry(1, 1).re - (-gamma * t).exp()).abs() < 1e-8, "t={t}");
        assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn exact_propagation_matches_dense_expm() {
    let (spec, l) = dephased_xxx(0.2);
    let rho0 = DensityVector::from_pure(&StateVector::neel(2).unwrap());
    let got = lindblad_exact_propagate(&l, &rho0, 5.0, 1e-12).unwrap();
    let gen = kron_of(&spec) * c(5.0, 0.0);
    let want = taylor_expm(&gen) * nalgebra::DVector::from_column_slice(rho0.amplitudes());
    let want = DensityVector::from_amplitudes(2, want.as_slice().to_vec()).unwrap();
    assert!(frobenius(&got, &want) < 1e-6);
}

#[test]
fn zero_time_returns_the_initial_state() {
    let (_, l) = dephased_xxx(0.2);
    let rho0 = DensityVector::from_pure(&random_state(2, &mut rng(8)));
    assert_eq!(lindblad_exact_propagate(&l, &rho0, 0.0, 1e-12).unwrap(), rho0);
}

#[test]
fn closed_limit_agrees_with_statevector_evolution() {
    let h = heisenberg_xyz(3, 1.0, 2.0, 3.0, 1.0).unwrap();
    let l = build_liouvillian(&LindbladSpec::new(h.clone(), vec![]).unwrap()).unwrap();
    let psi = random_state(3, &mut rng(12));
    let rho = lindblad_exact_propagate(&l, &DensityVector::from_pure(&psi), 2.5, 1e-13).unwrap();
    let want = DensityVector::from_pure(&exact_evolve(&h, &psi, 2.5, 1e-13).unwrap());
    assert!(frobenius(&rho, &want) < 1e-8);
}

#[test]
fn trotter_step_without_collapses_is_the_unitary_factor() {
    let h = heisenberg_xyz(2, 1.0, 1.0, 1.0, 1.0).unwrap();
    let l = build_liouvillian(&LindbladSpec::new(h.clone(), vec![]).unwrap()).unwrap();
    let rho0 = DensityVector::from_pure(&StateVector::neel(2).unwrap());
    for splitting in [Splitting::ChannelExact, Splitting::ContractionJump] {
        let step = trotter_liouvillian_step(&l, 0.3, &rho0, splitting, 1e-13).unwrap();
        let u = taylor_expm(&(kron_sum(&h) * c(0.0, -0.3)));
        let rho = devectorize(&rho0);
        let want = vectorize(&(&u * rho * u.adjoint())).unwrap();
        assert!(frobenius(&step, &want) < 1e-12);
    }
}

fn trotter_error(l: &LiouvillianOp, rho0: &DensityVector, t: f64, steps: usize, s: Splitting) -> f64 {
    let exact = lindblad_exact_propagate(l, rho0, t, 1e-13).unwrap();
    let approx = trotter_liouvillian_evolve(l, rho0, t, steps, s, 1e-13).unwrap();
    frobenius(&approx, &exact)
}

#[test]
fn contraction_jump_error_halves_on_pure_damping() {
    let l = damping(1.0, PauliSum::zero(1).unwrap());
    let ratio = trotter_error(&l, &excited(), 1.0, 64, Splitting::ContractionJump)
        / trotter_error(&l, &excited(), 1.0, 128, Splitting::ContractionJump);
    assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn channel_exact_error_halves_on_driven_damping() {
    let l = damping(1.0, PauliSum::single("X", 0.8).unwrap());
    let ratio = trotter_error(&l, &excited(), 1.0, 64, Splitting::ChannelExact)
        / trotter_error(&l, &excited(), 1.0, 128, Splitting::ChannelExact);
    assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn channel_exact_is_exact_for_pure_damping() {
    let l = damping(1.0, PauliSum::zero(1).unwrap());
    assert!(trotter_error(&l, &excited(), 1.0, 3, Splitting::ChannelExact) < 1e-12);
}

#[test]
fn contraction_jump_loses_trace_at_first_order() {
    let l = damping(1.0, PauliSum::zero(1).unwrap());
    let drift = |steps| {
        let rho = trotter_liouvillian_evolve(&l, &excited(), 1.0, steps, Splitting::ContractionJump, 1e-13).unwrap();
        (rho.trace() - c(1.0, 0.0)).norm()
    };
    let ratio = drift(64) / drift(128);
    assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn full_span_open_fast_forward_is_exact() {
    let l = damping(0.4, PauliSum::single("X", 0.7).unwrap());
    let basis: Vec<DensityVector> = (0..4)
        .map(|k| {
            let mut amps = vec![c(0.0, 0.0); 4];
            amps[k] = c(1.0, 0.0);
            DensityVector::from_amplitudes(1, amps).unwrap()
        })
        .collect();
    let rho0 = DensityVector::from_pure(&random_state(1, &mut rng(6)));
    let c0 = CVector::from_column_slice(rho0.amplitudes());
    let ff = open_fast_forward(&l, &basis, &c0, 1e-12).unwrap();
    assert_eq!(ff.coefficients(0.0), c0);
    for t in [0.5, 2.0, 6.0] {
        let got = combine(&basis, ff.coefficients(t).as_slice()).unwrap();
        let want = lindblad_exact_propagate(&l, &rho0, t, 1e-13).unwrap();
        assert!(frobenius(&got, &want) < 1e-8, "t={t}");
        assert!((got.trace() - c(1.0, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn damping_chain_tracks_population() {
    let l = damping(0.5, PauliSum::single("X", 0.3).unwrap());
    let tau = 0.1;
    let rho0 = excited();
    let basis: Vec<DensityVector> = liouvillian_chain(&l, &rho0, 5, tau, 1e-13)
        .unwrap()
        .into_iter()
        .map(DensityVector::normalized)
        .collect();
    let mut c0 = CVector::zeros(5);
    c0[0] = c(rho0.norm(), 0.0);
    let ff = open_fast_forward(&l, &basis, &c0, 1e-12).unwrap();
    let z = pauli_matrix('Z');
    for k in 0..=20 {
        let t = k as f64 * tau;
        let got = combine(&basis, ff.coefficients(t).as_slice()).unwrap();
        let want = lindblad_exact_propagate(&l, &rho0, t, 1e-13).unwrap();
        let dz = got.expectation_dense(&z).unwrap() - want.expectation_dense(&z).unwrap();
        assert!(dz.norm() < 1e-3, "t={t}");
    }
}

#[test]
fn open_fast_forward_rejects_unnormalized_basis() {
    let l = damping(0.4, PauliSum::zero(1).unwrap());
    let basis = vec![DensityVector::maximally_mixed(1)];
    assert!(open_fast_forward(&l, &basis, &CVector::from_element(1, c(1.0, 0.0)), 1e-12).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_trace_preserving_path_conserves_trace_and_positivity(
        seed in any::<u64>(),
        gamma in 0.0f64..1.0,
        t in 0.0f64..4.0,
        steps in 1usize..20,
    ) {
        let h = heisenberg_xyz(2, 1.0, 2.0, 3.0, 0.5).unwrap();
        let mut collapses = vec![Collapse::lowering(2, 1, gamma).unwrap(), Collapse::dephasing(2, 2, 0.5 * gamma).unwrap()];
        collapses.extend(Collapse::depolarizing(2, 1, 0.3 * gamma).unwrap());
        let l = build_liouvillian(&LindbladSpec::new(h, collapses).unwrap()).unwrap();
        let rho0 = DensityVector::from_pure(&random_state(2, &mut rng(seed)));
        let exact = lindblad_exact_propagate(&l, &rho0, t, 1e-12).unwrap();
        let trotter = trotter_liouvillian_evolve(&l, &rho0, t, steps, Splitting::ChannelExact, 1e-12).unwrap();
        for rho in [&exact, &trotter] {
            prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-8);
            let m = devectorize(rho);
            prop_assert!(max_diff(&m, &m.adjoint()) < 1e-8);
        }
        let m = devectorize(&exact);
        let herm = (&m + m.adjoint()) * c(0.5, 0.0);
        let min = SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-6);
    }

    #[test]
    fn generator_outputs_are_traceless(seed in any::<u64>()) {
        let (_, l) = dephased_xxx(0.3);
        let rho0 = DensityVector::from_pure(&random_state(2, &mut rng(seed)));
        prop_assert!(l.apply(&rho0).unwrap().trace().norm() < 1e-12);
    }
}
