use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mubwigner::field::FieldSpec;
use mubwigner::fixtures::builtin;
use mubwigner::linalg::{self, CMatrix};
use mubwigner::pauli::PauliString;
use mubwigner::phasespace::{PhasePoint, TranslationMap};
use mubwigner::tomo::simulate;
use mubwigner::wigner::{check_covariance, invert, wigner, DensityMatrix, QuantumNet};

// Entry (r, c) of a Pauli string as a product of single-qubit entries.
fn pauli_entry(p: &PauliString, r: usize, c: usize) -> Complex64 {
    let n = p.num_qubits();
    let i = Complex64::i();
    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    let mut acc = i.powu(u32::from(p.phase()));
    for q in 0..n {
        let (rb, cb) = ((r >> (n - 1 - q)) & 1, (c >> (n - 1 - q)) & 1);
        acc *= match (p.letter(q), rb, cb) {
            ('I', a, b) | ('Z', a, b) if a != b => zero,
            ('I', _, _) => one,
            ('Z', 0, _) => one,
            ('Z', _, _) => -one,
            ('X', a, b) | ('Y', a, b) if a == b => zero,
            ('X', _, _) => one,
            ('Y', 0, _) => -i,
            ('Y', _, _) => i,
            _ => unreachable!(),
        };
    }
    acc
}

fn oracle_matrix(p: &PauliString) -> CMatrix {
    let d = 1 << p.num_qubits();
    DMatrix::from_fn(d, d, |r, c| pauli_entry(p, r, c))
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    let m = (1u32 << n) - 1;
    (0..=m, 0..=m, 0u8..4)
        .prop_map(move |(x, z, ph)| PauliString::from_masks(n, x, z).with_phase(ph))
}

fn field_and_elements() -> impl Strategy<Value = (FieldSpec, u32, u32, u32)> {
    (1u32..=6).prop_flat_map(|n| {
        let m = (1u32 << n) - 1;
        (
            Just(FieldSpec::default_for(n).expect("field")),
            0..=m,
            0..=m,
            0..=m,
        )
    })
}

fn point(map: &TranslationMap) -> impl Strategy<Value = PhasePoint> {
    let n = map.size();
    let map = map.clone();
    (0..n * n).prop_map(move |i| map.point_at(i))
}

fn table1_net(assignment: &[usize]) -> QuantumNet {
    let t = builtin("table1").unwrap().table().unwrap();
    QuantumNet::with_assignment(&t, &TranslationMap::gf8(), assignment).unwrap()
}

fn state(seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed.is_multiple_of(2) {
        DensityMatrix::random_mixed(8, &mut rng).matrix().clone()
    } else {
        DensityMatrix::random_pure(8, &mut rng).matrix().clone()
    }
}

proptest! {
    #[test]
    fn field_axioms((spec, a, b, c) in field_and_elements()) {
        let (a, b, c) = (spec.element(a).unwrap(), spec.element(b).unwrap(), spec.element(c).unwrap());
        prop_assert_eq!(spec.mul(spec.mul(a, b), c), spec.mul(a, spec.mul(b, c)));
        prop_assert_eq!(spec.mul(a, b), spec.mul(b, a));
        prop_assert_eq!(spec.mul(a, spec.add(b, c)), spec.add(spec.mul(a, b), spec.mul(a, c)));
        prop_assert_eq!(spec.frobenius(spec.add(a, b)), spec.add(spec.frobenius(a), spec.frobenius(b)));
        prop_assert_eq!(spec.trace(spec.add(a, b)), spec.trace(a) ^ spec.trace(b));
        if !a.is_zero() {
            prop_assert_eq!(spec.mul(a, spec.inverse(a).unwrap()), spec.one());
            let k = spec.discrete_log(a).unwrap();
            prop_assert_eq!(spec.primitive_power(i64::from(k)), a);
        } else {
            prop_assert!(spec.inverse(a).is_err());
        }
    }

    #[test]
    fn self_dual_coordinates_reconstruct((spec, a, _, _) in field_and_elements()) {
        prop_assume!(spec.degree() <= 5);
        let basis = spec.default_self_dual_basis().unwrap();
        let a = spec.element(a).unwrap();
        let coords = basis.coordinates(&spec, a);
        let back = basis.elements().iter().zip(&coords)
            .filter(|(_, &c)| c)
            .fold(spec.zero(), |acc, (&d, _)| spec.add(acc, d));
        prop_assert_eq!(back, a);
    }

    #[test]
    fn pauli_product_matches_dense((p, q) in (1usize..=3).prop_flat_map(|n| (pauli(n), pauli(n)))) {
        let pm = oracle_matrix(&p);
        prop_assert!(linalg::max_abs_diff(&p.to_matrix().unwrap(), &pm) < 1e-14);
        let prod = p * q;
        prop_assert!(linalg::max_abs_diff(&oracle_matrix(&prod), &(&pm * oracle_matrix(&q))) < 1e-14);
        let commute = linalg::max_abs_diff(&(&pm * oracle_matrix(&q)), &(oracle_matrix(&q) * &pm)) < 1e-14;
        prop_assert_eq!(p.commutes(&q).unwrap(), commute);
    }

    #[test]
    fn translation_map_is_additive(p in pauli(3), q in pauli(3)) {
        let map = TranslationMap::gf8();
        let sum = map.op_to_point(&(p * q)).unwrap();
        prop_assert_eq!(sum, map.op_to_point(&p).unwrap() + map.op_to_point(&q).unwrap());
        let back = map.point_to_op(map.op_to_point(&p).unwrap());
        prop_assert_eq!(back.class_key(), p.class_key());
    }

    #[test]
    fn wigner_round_trip_any_net(assignment in proptest::collection::vec(0usize..8, 9), seed in any::<u64>()) {
        let net = table1_net(&assignment);
        let rho = state(seed);
        let w = wigner(&rho, &net).unwrap();
        prop_assert!((w.sum() - 1.0).abs() < 1e-12);
        prop_assert!(linalg::max_abs_diff(&invert(&w, &net), &rho) < 1e-12);
    }

    #[test]
    fn covariance_any_translation(seed in any::<u64>(), v in point(&TranslationMap::gf8())) {
        let net = table1_net(&[0; 9]);
        let c = check_covariance(&net, v, &state(seed), 1e-12).unwrap();
        prop_assert!(c.passed, "deviation {}", c.max_deviation);
    }

    #[test]
    fn sampled_counts_sum_to_shots(seed in any::<u64>(), shots in 1u64..5000) {
        let net = table1_net(&[0; 9]);
        let rec = simulate(&state(seed), &net, shots, seed).unwrap();
        prop_assert_eq!(rec.counts.len(), 9);
        for row in &rec.counts {
            prop_assert_eq!(row.len(), 8);
            prop_assert_eq!(row.iter().sum::<u64>(), shots);
        }
        let again = simulate(&state(seed), &net, shots, seed).unwrap();
        prop_assert_eq!(again.counts, rec.counts);
    }
}

#[test]
fn self_dual_search_refuses_large_fields() {
    assert!(FieldSpec::default_for(6)
        .unwrap()
        .default_self_dual_basis()
        .is_err());
}
