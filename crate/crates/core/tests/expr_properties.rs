use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use symred::exprcore::{differentiate, equivalent, evaluate, parse, simplify, Domain, Env, Expr};
use symred::numerics::fd_check;
use symred::solutions::{catalog, closed_forms};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::sym("x")),
        Just(Expr::sym("t")),
        (-4i64..5).prop_map(Expr::int),
        (1i64..5, 2i64..6).prop_map(|(n, d)| Expr::rational(n, d)),
    ]
}

// smooth and finite on x, t in [0.5, 2]
fn smooth() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 1i64..4).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(|a| (Expr::int(1) + a.powi(2)).ln()),
            inner.prop_map(|a| Expr::int(1) / (Expr::int(2) + a.cos())),
        ]
    })
}

fn chart() -> Domain {
    Domain::new().var("x", 0.5, 2.0).var("t", 0.5, 2.0)
}

fn d(e: &Expr, v: &str) -> Expr {
    differentiate(e, v).unwrap()
}

/// Closed-form fields of the catalog with their sampling domains.
fn catalog_exprs() -> Vec<(&'static str, Expr, Domain)> {
    let mut out = Vec::new();
    for e in catalog() {
        for c in closed_forms(e, 1.0).unwrap() {
            for f in c.fields.values() {
                out.push((e.id.as_str(), f.clone(), c.domain.clone()));
            }
        }
    }
    out
}

#[test]
fn catalog_round_trip() {
    for (id, f, _) in catalog_exprs() {
        let s = simplify(&f);
        let back = parse(&s.to_string()).unwrap_or_else(|err| panic!("{}: {} -> {}", id, s, err));
        assert_eq!(simplify(&back), s, "{}", id);
    }
}

#[test]
fn catalog_simplify_idempotent() {
    for (_, f, _) in catalog_exprs() {
        let s = simplify(&f);
        assert_eq!(simplify(&s), s);
    }
}

fn sample_valid<R: rand::Rng>(exprs: &[&Expr], dom: &Domain, rng: &mut R) -> Option<Env> {
    for _ in 0..200 {
        let env = dom.sample(rng);
        if dom.admits(&env) && exprs.iter().all(|e| evaluate(e, &env).map(f64::is_finite).unwrap_or(false)) {
            return Some(env);
        }
    }
    None
}

#[test]
fn catalog_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for (id, f, dom) in catalog_exprs() {
        for v in f.symbols() {
            let Ok(df) = differentiate(&f, &v) else { continue };
            for _ in 0..20 {
                let Some(env) = sample_valid(&[&f, &df], &dom, &mut rng) else { break };
                let h = 1e-5;
                // stay inside the chart so the stencil does not cross a branch point
                let x0 = env.get(&v).unwrap();
                let (mut ep, mut em) = (env.clone(), env.clone());
                ep.set(&v, x0 + h);
                em.set(&v, x0 - h);
                if evaluate(&f, &ep).is_err() || evaluate(&f, &em).is_err() {
                    continue;
                }
                let err = fd_check(&f, &v, &env, h).unwrap();
                assert!(err < 1e-6, "{} d/d{} of {}: {:.3e}", id, v, f, err);
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "{}", checked);
}

#[test]
fn catalog_clairaut() {
    let mut seen = BTreeSet::new();
    let mut subs: Vec<(&str, Expr, Domain)> = Vec::new();
    for (id, f, dom) in catalog_exprs() {
        f.visit(&mut |s: &Expr| {
            let syms = s.symbols();
            if syms.contains("t") && syms.contains("x") && seen.insert(s.to_string()) {
                subs.push((id, s.clone(), dom.clone()));
            }
        });
    }
    // the pool is smaller than 100, so draws repeat with fresh points
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (id, s, dom) = &subs[rng.gen_range(0..subs.len())];
        let tx = d(&d(s, "x"), "t");
        let xt = d(&d(s, "t"), "x");
        let env = sample_valid(&[&tx, &xt], dom, &mut rng).unwrap_or_else(|| panic!("{}: no valid point", id));
        let at = Domain::new().with_env(env);
        assert!(equivalent(&tx, &xt, &at, 1, 1e-10, &mut rng).unwrap(), "{}: {}", id, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(e in smooth()) {
        let s = simplify(&e);
        let back = parse(&s.to_string()).unwrap();
        prop_assert_eq!(simplify(&back), s);
    }

    #[test]
    fn simplify_is_idempotent(e in smooth()) {
        let s = simplify(&e);
        prop_assert_eq!(simplify(&s), s);
    }

    #[test]
    fn derivative_is_linear(e1 in smooth(), e2 in smooth(), a in -5i64..6, b in 1i64..7, seed in any::<u64>()) {
        let (a, b) = (Expr::int(a), Expr::rational(1, b));
        let lhs = d(&(&a * &e1 + &b * &e2), "x");
        let rhs = &a * d(&e1, "x") + &b * d(&e2, "x");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(equivalent(&lhs, &rhs, &chart(), 10, 1e-9, &mut rng).unwrap());
    }

    #[test]
    fn leibniz_rule(e1 in smooth(), e2 in smooth(), seed in any::<u64>()) {
        let lhs = d(&(&e1 * &e2), "t");
        let rhs = d(&e1, "t") * &e2 + &e1 * d(&e2, "t");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(equivalent(&lhs, &rhs, &chart(), 10, 1e-9, &mut rng).unwrap());
    }

    #[test]
    fn mixed_partials_commute(e in smooth(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(equivalent(&d(&d(&e, "x"), "t"), &d(&d(&e, "t"), "x"), &chart(), 10, 1e-9, &mut rng).unwrap());
    }

    #[test]
    fn derivative_matches_central_difference(e in smooth(), x in 0.6f64..1.9, t in 0.6f64..1.9) {
        let env = Env::new().with("x", x).with("t", t);
        for v in ["x", "t"] {
            prop_assert!(fd_check(&e, v, &env, 1e-5).unwrap() < 1e-6);
        }
    }
}
