mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qdrqn::statevec::{Gate, StateVector};
use qdrqn::vqc::{build_circuit, run_vqc, CircuitSpec, VqcParams};
use qdrqn::Error;

fn angle() -> impl Strategy<Value = f64> {
    -2.0 * PI..2.0 * PI
}

fn gate(n: usize) -> BoxedStrategy<Gate> {
    let q = 0..n;
    let single = prop_oneof![
        q.clone().prop_map(Gate::H),
        (q.clone(), angle()).prop_map(|(q, t)| Gate::Ry(q, t)),
        (q.clone(), angle()).prop_map(|(q, t)| Gate::Rz(q, t)),
        (q.clone(), angle(), angle(), angle()).prop_map(|(q, a, b, c)| Gate::Rot(q, a, b, c)),
    ];
    if n < 2 {
        return single.boxed();
    }
    let cnot = (0..n, 1..n).prop_map(move |(control, shift)| Gate::Cnot {
        control,
        target: (control + shift) % n,
    });
    prop_oneof![3 => single, 1 => cnot].boxed()
}

fn circuit() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(gate(n), 0..24)))
}

fn dense(gate: &Gate, n: usize) -> common::Matrix {
    match *gate {
        Gate::H(q) => common::embed(&common::hadamard(), q, n),
        Gate::Ry(q, t) => common::embed(&common::ry(t), q, n),
        Gate::Rz(q, t) => common::embed(&common::rz(t), q, n),
        Gate::Rot(q, a, b, c) => common::embed(&common::rot(a, b, c), q, n),
        Gate::Cnot { control, target } => common::cnot(control, target, n),
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn matches_dense_matrices((n, gates) in circuit()) {
        let mut sv = StateVector::zero(n).unwrap();
        let mut psi = common::basis_zero(n);
        for g in &gates {
            sv.apply(g).unwrap();
            psi = common::apply(&dense(g, n), &psi);
        }
        prop_assert!(max_diff(sv.amplitudes(), &psi) <= 1e-12);
        prop_assert!((sv.norm() - 1.0).abs() <= 1e-10);
        for q in 0..n {
            let z = sv.expectation_z(q).unwrap();
            prop_assert!((z - common::z_expectation(&psi, q, n)).abs() <= 1e-12);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
        }
    }

    #[test]
    fn inverse_sequence_restores_state((n, gates) in circuit(), prefix in prop::collection::vec(angle(), 4)) {
        let mut sv = StateVector::zero(n).unwrap();
        for q in 0..n {
            sv.apply(&Gate::Rot(q, prefix[0], prefix[1] + q as f64, prefix[2])).unwrap();
        }
        let start = sv.clone();
        for g in &gates {
            sv.apply(g).unwrap();
        }
        for g in gates.iter().rev() {
            sv.apply(&g.inverse()).unwrap();
        }
        prop_assert!(max_diff(sv.amplitudes(), start.amplitudes()) <= 1e-12);
    }

    #[test]
    fn dense_gates_are_unitary((n, gates) in circuit()) {
        for g in &gates {
            let u = dense(g, n);
            let prod = common::matmul(&common::dagger(&u), &u);
            let id = common::identity(1 << n);
            for (r, s) in prod.iter().zip(&id) {
                prop_assert!(max_diff(r, s) <= 1e-12);
            }
        }
    }

    #[test]
    fn ry_expectation_is_cosine(theta in angle(), n in 1usize..=5, q in 0usize..5) {
        let q = q % n;
        let mut sv = StateVector::zero(n).unwrap();
        sv.apply(&Gate::Ry(q, theta)).unwrap();
        prop_assert!((sv.expectation_z(q).unwrap() - theta.cos()).abs() <= 1e-12);
    }

    #[test]
    fn rot_expectation_depends_only_on_beta(a in angle(), b in angle(), c in angle()) {
        let mut sv = StateVector::zero(1).unwrap();
        sv.apply(&Gate::Rot(0, a, b, c)).unwrap();
        prop_assert!((sv.expectation_z(0).unwrap() - b.cos()).abs() <= 1e-12);
    }

    #[test]
    fn vqc_matches_dense_oracle(
        n in 1usize..=4,
        layers in 1usize..=2,
        seed in any::<u64>(),
        input in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        use rand::SeedableRng;
        let spec = CircuitSpec::new(n, layers).unwrap();
        let params = VqcParams::random(spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let out = run_vqc(&spec, &input[..n], &params).unwrap();
        let expected = common::vqc(n, layers, &input[..n], params.angles());
        for (o, e) in out.iter().zip(&expected) {
            prop_assert!((o - e).abs() <= 1e-12);
            prop_assert!(o.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn vqc_is_deterministic(seed in any::<u64>(), input in prop::collection::vec(-2.0f64..2.0, 3)) {
        use rand::SeedableRng;
        let spec = CircuitSpec::new(3, 2).unwrap();
        let params = VqcParams::random(spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(run_vqc(&spec, &input, &params).unwrap(), run_vqc(&spec, &input, &params).unwrap());
    }

    #[test]
    fn zero_rot_is_identity((n, gates) in circuit(), q in 0usize..4) {
        let q = q % n;
        let mut sv = StateVector::zero(n).unwrap();
        for g in &gates {
            sv.apply(g).unwrap();
        }
        let before = sv.clone();
        sv.apply(&Gate::Rot(q, 0.0, 0.0, 0.0)).unwrap();
        prop_assert!(max_diff(sv.amplitudes(), before.amplitudes()) <= 1e-15);
    }
}

#[test]
fn gate_list_simulated_gatewise_matches_run_vqc() {
    use rand::SeedableRng;
    let spec = CircuitSpec::new(4, 2).unwrap();
    let params = VqcParams::random(spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7));
    let input = [0.3, -1.2, 2.0, 0.0];
    let mut sv = StateVector::zero(4).unwrap();
    for g in build_circuit(&spec, &input, &params).unwrap() {
        sv.apply(&g).unwrap();
    }
    let out = run_vqc(&spec, &input, &params).unwrap();
    for (q, o) in out.iter().enumerate() {
        assert!((sv.expectation_z(q).unwrap() - o).abs() < 1e-12);
    }
}

#[test]
fn invalid_gates_are_rejected() {
    let mut sv = StateVector::zero(2).unwrap();
    assert_eq!(sv.apply(&Gate::H(2)), Err(Error::QubitIndex { index: 2, n_qubits: 2 }));
    assert_eq!(
        sv.apply(&Gate::Cnot { control: 1, target: 1 }),
        Err(Error::ControlIsTarget(1))
    );
    assert_eq!(StateVector::zero(0).unwrap_err(), Error::QubitCount(0));
}

#[test]
fn vqc_rejects_wrong_input_width() {
    let spec = CircuitSpec::new(3, 1).unwrap();
    let params = VqcParams::zeros(spec);
    assert!(matches!(run_vqc(&spec, &[0.0; 2], &params), Err(Error::Shape { .. })));
}
