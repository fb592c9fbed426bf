use magicbench::ancilla::eliminate_ancillas;
use magicbench::circuit::{Circuit, Gate};
use magicbench::dense::{pauli_matrix, random_density, unitary_of_circuit};
use magicbench::harness::{fit_power_law, overhead_from_fit};
use magicbench::pauli::{pauli_mul, PauliOperator};
use magicbench::tableau::CliffordTableau;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n), 0u8..4)
        .prop_map(move |(x, z, ph)| PauliOperator::from_bits(n, &x, &z, ph))
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    (0..n, 1..n.max(2), 0..8u8).prop_map(move |(a, off, k)| {
        let b = (a + off) % n;
        match (k, n > 1) {
            (0, _) => Gate::H(a),
            (1, _) => Gate::S(a),
            (2, _) => Gate::U0(a),
            (3, _) => Gate::Sdg(a),
            (4, true) => Gate::Cnot(a, b),
            (5, true) => Gate::Cz(a, b),
            (6, true) => Gate::Swap(a, b),
            _ => Gate::Y(a),
        }
    })
}

fn clifford_circuit(n: usize) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate(n), 0..25).prop_map(move |g| Circuit::from_gates(n, g).unwrap())
}

fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_matrices((p, q) in (1usize..4).prop_flat_map(|n| (pauli(n), pauli(n)))) {
        let pq = pauli_mul(&p, &q).unwrap();
        let want = pauli_matrix(&p) * pauli_matrix(&q);
        prop_assert!(max_abs(&(pauli_matrix(&pq) - want)) < 1e-12);
        let qp = pauli_mul(&q, &p).unwrap();
        let same = max_abs(&(pauli_matrix(&pq) - pauli_matrix(&qp))) < 1e-12;
        prop_assert_eq!(p.commutes(&q), same);
    }

    #[test]
    fn tableau_conjugation_matches_unitary(
        (c, p) in (1usize..4).prop_flat_map(|n| (clifford_circuit(n), pauli(n)))
    ) {
        let t = CliffordTableau::from_circuit(&c).unwrap();
        prop_assert!(t.is_symplectic());
        let u = unitary_of_circuit(&c).unwrap();
        let want = &u * pauli_matrix(&p) * u.adjoint();
        prop_assert!(max_abs(&(pauli_matrix(&t.conjugate(&p).unwrap()) - want)) < 1e-10);
        let back = t.inverse().conjugate(&t.conjugate(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn tableau_circuit_round_trip(c in (1usize..5).prop_flat_map(clifford_circuit)) {
        let t = CliffordTableau::from_circuit(&c).unwrap();
        prop_assert_eq!(CliffordTableau::from_circuit(&t.to_circuit()).unwrap(), t);
        prop_assert_eq!(Circuit::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn ancilla_push_forward_conserves_mass(
        (c, m, seed) in (1usize..4, 1usize..3).prop_flat_map(|(n, m)| (clifford_circuit(n + m), Just(m), any::<u64>()))
    ) {
        let n = c.n - m;
        let t = CliffordTableau::from_circuit(&c).unwrap();
        let (v, post) = eliminate_ancillas(&t, m).unwrap();
        prop_assert_eq!(v.num_qubits(), n);
        prop_assert_eq!(post.outputs(), n + m);
        prop_assert!(post.matrix.inverse().is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(n, 1 << n, &mut rng).unwrap();
        let out = post.push_forward(&rho.diagonal()).unwrap();
        prop_assert!(out.iter().all(|&w| w >= -1e-15));
        prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_fit_round_trip(a in 1e-3f64..10.0, b in -3.0f64..-0.1, x0 in 1.0f64..100.0) {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| {
            let x = x0 * 3f64.powi(i);
            (x, a * x.powf(b))
        }).collect();
        let f = fit_power_law(&pts).unwrap();
        prop_assert!((f.a / a - 1.0).abs() < 1e-9);
        prop_assert!((f.b - b).abs() < 1e-9);
        let target = 0.3 * a * 0.5;
        let n = overhead_from_fit(&f, 0.3, 0.5 * a).unwrap();
        prop_assert!(f.eval(n as f64) <= target * (1.0 + 1e-9));
        if n > 1 {
            prop_assert!(f.eval((n - 1) as f64) > target * (1.0 - 1e-9));
        }
    }
}
