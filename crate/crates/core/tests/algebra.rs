use num_complex::Complex64;
use pauliprop::oracle::DenseOperator;
use pauliprop::{Letter, PauliString, PauliSum};
use proptest::prelude::*;

fn letter() -> impl Strategy<Value = Letter> {
    (0u8..4).prop_map(Letter::from_code)
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(letter(), n).prop_map(move |ls| PauliString::from_sites(n, ls.into_iter().enumerate()))
}

fn pauli_sum(n: usize) -> impl Strategy<Value = PauliSum> {
    proptest::collection::vec((pauli(n), -2.0f64..2.0), 0..6)
        .prop_map(move |terms| PauliSum::from_terms(n, terms).unwrap())
}

fn dense_product(a: &PauliString, b: &PauliString) -> nalgebra::DMatrix<Complex64> {
    DenseOperator::pauli(a).matrix() * DenseOperator::pauli(b).matrix()
}

fn max_abs(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn product_matches_dense(a in pauli(3), b in pauli(3)) {
        let (phase, c) = a.multiply(&b).unwrap();
        let want = dense_product(&a, &b);
        let got = DenseOperator::pauli(&c).matrix() * phase.to_complex();
        prop_assert!(max_abs(&(want - got)) < 1e-12);
    }

    #[test]
    fn product_is_associative(a in pauli(4), b in pauli(4), c in pauli(4)) {
        let (p1, ab) = a.multiply(&b).unwrap();
        let (p2, ab_c) = ab.multiply(&c).unwrap();
        let (q1, bc) = b.multiply(&c).unwrap();
        let (q2, a_bc) = a.multiply(&bc).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!((p1.power() + p2.power()) % 4, (q1.power() + q2.power()) % 4);
    }

    #[test]
    fn every_pauli_is_an_involution(a in pauli(5)) {
        let (phase, sq) = a.multiply(&a).unwrap();
        prop_assert!(sq.is_identity());
        prop_assert_eq!(phase.power(), 0);
    }

    #[test]
    fn commutation_from_symplectic_form(a in pauli(3), b in pauli(3)) {
        let ab = dense_product(&a, &b);
        let ba = dense_product(&b, &a);
        let anti = max_abs(&(ab.clone() + ba.clone())) < 1e-12;
        prop_assert_eq!(a.anticommutes(&b).unwrap(), anti);
        prop_assert_eq!(!anti, max_abs(&(ab - ba)) < 1e-12);
    }

    #[test]
    fn weight_counts_non_identity_letters(a in pauli(6)) {
        let direct = (0..6).filter(|&q| a.letter(q) != Letter::I).count();
        prop_assert_eq!(a.weight(), direct);
        prop_assert_eq!(a.support().len(), direct);
    }

    #[test]
    fn string_round_trip(a in pauli(7)) {
        let back: PauliString = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn sum_text_round_trip(o in pauli_sum(3)) {
        // an empty observable is rejected by the parser
        prop_assume!(!o.is_empty());
        let back = PauliSum::parse(&o.to_text()).unwrap();
        prop_assert_eq!(back.len(), o.len());
        for (p, c) in o.iter() {
            prop_assert!((back.coefficient(p) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval(o in pauli_sum(3)) {
        let dense = DenseOperator::from_pauli_sum(&o);
        let f = dense.normalized_frobenius();
        prop_assert!((f * f - o.norm_sq()).abs() < 1e-10);
        let back = dense.to_pauli_sum().unwrap();
        prop_assert!(back.sub(&o).unwrap().norm_sq() < 1e-20);
    }

    #[test]
    fn addition_is_linear(a in pauli_sum(2), b in pauli_sum(2), s in -3.0f64..3.0) {
        let lhs = DenseOperator::from_pauli_sum(&a.add_scaled(&b, s).unwrap());
        let rhs = DenseOperator::from_pauli_sum(&a).matrix() + DenseOperator::from_pauli_sum(&b).matrix() * Complex64::from(s);
        prop_assert!(max_abs(&(lhs.matrix() - rhs)) < 1e-12);
    }

    #[test]
    fn inner_matches_trace(a in pauli_sum(3), b in pauli_sum(3)) {
        let ta = DenseOperator::from_pauli_sum(&a);
        let tb = DenseOperator::from_pauli_sum(&b);
        let tr = ta.trace_product(&tb).re / 8.0;
        prop_assert!((tr - a.inner(&b)).abs() < 1e-10);
    }
}

#[test]
fn phase_convention() {
    let x: PauliString = "X".parse().unwrap();
    let z: PauliString = "Z".parse().unwrap();
    let (phase, y) = x.multiply(&z).unwrap();
    assert_eq!(y.to_string(), "Y");
    assert_eq!(phase.to_complex(), Complex64::new(0.0, -1.0));
}

#[test]
fn qubit_zero_is_most_significant() {
    let z0 = DenseOperator::pauli(&"ZI".parse().unwrap());
    // diagonal of Z⊗I is (1, 1, −1, −1)
    let diag: Vec<f64> = z0.diagonal();
    assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
}

#[test]
fn malformed_input_is_rejected() {
    assert!("XQZ".parse::<PauliString>().is_err());
    assert!(PauliSum::parse("1.0 XX\n2.0 Z").is_err());
    assert!(PauliSum::parse("abc XX").is_err());
}
