use proptest::prelude::*;
use std::sync::OnceLock;
use symred::liealg::{
    bch_conjugate, default_params, normalize, verify_conjugator, AlgebraElement, CaseId, LieAlgebraCase, NumericAlgebra,
};

fn algebra(id: CaseId) -> &'static NumericAlgebra {
    static ALL: OnceLock<Vec<NumericAlgebra>> = OnceLock::new();
    let all = ALL.get_or_init(|| {
        CaseId::ALL.iter().map(|c| LieAlgebraCase::new(*c).unwrap().numeric(&default_params()).unwrap()).collect()
    });
    &all[CaseId::ALL.iter().position(|c| *c == id).unwrap()]
}

fn case_id() -> impl Strategy<Value = CaseId> {
    prop::sample::select(CaseId::ALL.to_vec())
}

fn element(id: CaseId, k: f64) -> impl Strategy<Value = AlgebraElement> {
    let n = algebra(id).dim();
    prop::collection::vec(-k..k, n).prop_map(move |c| AlgebraElement::new(id, c))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol * (1.0 + v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(
        (id, x, y, z) in case_id().prop_flat_map(|id| (Just(id), element(id, 2.0), element(id, 2.0), element(id, 2.0)))
    ) {
        let alg = algebra(id);
        let b = |a: &[f64], c: &[f64]| alg.bracket(a, c);
        let xy = b(&x.coeffs, &y.coeffs);
        let yx = b(&y.coeffs, &x.coeffs);
        prop_assert!(xy.iter().zip(&yx).all(|(u, v)| (u + v).abs() < 1e-12));
        let j: Vec<f64> = (0..alg.dim())
            .map(|k| b(&x.coeffs, &b(&y.coeffs, &z.coeffs))[k] + b(&y.coeffs, &b(&z.coeffs, &x.coeffs))[k] + b(&z.coeffs, &b(&x.coeffs, &y.coeffs))[k])
            .collect();
        prop_assert!(j.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn conjugation_is_an_automorphism(
        (id, g, x, y) in case_id().prop_flat_map(|id| (Just(id), element(id, 1.0), element(id, 2.0), element(id, 2.0)))
    ) {
        let alg = algebra(id);
        let lhs = bch_conjugate(alg, &g, &AlgebraElement::new(id, alg.bracket(&x.coeffs, &y.coeffs)), None);
        let cx = bch_conjugate(alg, &g, &x, None);
        let cy = bch_conjugate(alg, &g, &y, None);
        prop_assert!(close(&lhs.coeffs, &alg.bracket(&cx.coeffs, &cy.coeffs), 1e-10));
    }

    #[test]
    fn label_survives_conjugation(
        (id, g, x) in case_id().prop_flat_map(|id| (Just(id), element(id, 1.0), element(id, 2.0)))
    ) {
        prop_assume!(x.norm() > 1e-3);
        let alg = algebra(id);
        let a = normalize(alg, &x).unwrap();
        let b = normalize(alg, &bch_conjugate(alg, &g, &x, None)).unwrap();
        prop_assert_eq!(a.label, b.label);
    }

    #[test]
    fn normal_form_is_a_fixed_point(
        (id, x) in case_id().prop_flat_map(|id| (Just(id), element(id, 2.0)))
    ) {
        prop_assume!(x.norm() > 1e-3);
        let alg = algebra(id);
        let c = normalize(alg, &x).unwrap();
        prop_assert!(verify_conjugator(alg, &x, &c) < 1e-8);
        let again = normalize(alg, &c.representative).unwrap();
        prop_assert_eq!(&again.label, &c.label);
        prop_assert!(close(&again.representative.coeffs, &c.representative.coeffs, 1e-8));
    }
}
