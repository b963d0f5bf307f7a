use proptest::prelude::*;
use std::collections::BTreeMap;
use symred::exprcore::ex;
use symred::solutions::{
    catalog, entry, instantiate, quadrature_grid, quadrature_solve, reduction_check, verify, verify_flow,
    SolutionError, VerifyConfig,
};

fn values(list: &[(&str, f64)]) -> BTreeMap<String, f64> {
    list.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn items_are_complete() {
    let items: Vec<u32> = catalog().iter().map(|e| e.item).collect();
    assert_eq!(items, (1..=27).collect::<Vec<_>>());
    for e in catalog() {
        assert!(!e.label.is_empty(), "{} cites no equation", e.id);
    }
}

#[test]
fn generators_annihilate_every_ansatz() {
    let cfg = VerifyConfig { samples: 20, seed: 3 };
    for e in catalog() {
        let Some(a) = e.ansatz().unwrap() else { continue };
        let gaps = reduction_check(e, &a, &cfg).unwrap();
        assert!(gaps["invariance"] < 1e-9, "{}: {:?}", e.id, gaps);
        for (k, v) in gaps.iter().filter(|(k, _)| k.starts_with("xi:")) {
            assert!(*v < 1e-9, "{} {}: {:e}", e.id, k, v);
        }
    }
}

#[test]
fn wrong_symmetry_variable_is_caught() {
    let cfg = VerifyConfig { samples: 20, seed: 3 };
    for (id, xi, section) in
        [("I.4", "x*t", ("x", "xi/t")), ("III.16", "t*x", ("t", "xi/x")), ("II.14", "x-t", ("x", "xi+t"))]
    {
        let e = entry(id).unwrap();
        let wrong = e.ansatz().unwrap().unwrap().with_xi(ex(xi), (section.0.into(), ex(section.1)));
        let gaps = reduction_check(e, &wrong, &cfg).unwrap();
        let worst = gaps.iter().filter(|(k, _)| k.starts_with("xi:")).map(|(_, v)| *v).fold(0.0, f64::max);
        assert!(worst > 1e-3, "{}: {:?}", id, gaps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn consistency_condition_rejects_draws(a in -3.0f64..3.0, p in 0.5f64..2.0) {
        prop_assume!((a * (a + 2.0)).abs() > 1e-6);
        let e = entry("II.11").unwrap();
        let r = instantiate(e, &values(&[("a", a), ("p", p), ("R", 1.0)]));
        prop_assert!(matches!(r, Err(SolutionError::Constraint(_))), "{:?}", r);
    }

    #[test]
    fn quadrature_tables_are_monotone(p in 0.5f64..2.0, f0 in 0.5f64..3.0) {
        let e = entry("IV.pot").unwrap();
        let set = values(&[("p", p), ("f0", f0), ("K", 0.0), ("t0", 0.0), ("s", 0.0), ("l0", 0.0)]);
        let grid = quadrature_grid(e, &set).unwrap();
        let table = quadrature_solve(e, &set, &grid).unwrap();
        prop_assert!(table.f.windows(2).all(|w| w[1] > w[0]));
        for (t, f) in table.t.iter().zip(&table.f) {
            prop_assert!((f + 2.0 * p * (f0.sqrt() * -t).ln()).abs() < 1e-8);
        }
    }

    #[test]
    fn verification_is_reproducible(seed in any::<u64>(), pick in 0usize..27) {
        let e = &catalog()[pick];
        let cfg = VerifyConfig { samples: 20, seed };
        let a = serde_json::to_string(&verify(e, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&verify(e, &cfg).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn flows_carry_solutions_to_solutions(tau in -0.3f64..0.3, seed in any::<u64>()) {
        let cfg = VerifyConfig { samples: 30, seed };
        let r = verify_flow(entry("I.1").unwrap(), "X4", tau, &cfg).unwrap();
        prop_assert!(r.pass, "{:?}", r.residuals);
        let r = verify_flow(entry("III.16").unwrap(), "X5", tau / 3.0, &cfg).unwrap();
        prop_assert!(r.pass, "{:?}", r.residuals);
    }
}
