use super::*;
use crate::exprcore::{evaluate, ex};

fn vals(list: &[(&str, f64)]) -> BTreeMap<String, f64> {
    list.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn at(e: &Expr, list: &[(&str, f64)]) -> f64 {
    let env = list.iter().fold(Env::new(), |env, (k, v)| env.with(k, *v));
    evaluate(e, &env).unwrap()
}

#[test]
fn one_entry_per_item() {
    let items: Vec<u32> = catalog().iter().map(|e| e.item).collect();
    assert_eq!(items, (1..=27).collect::<Vec<_>>());
    let mut ids: Vec<&str> = catalog().iter().map(|e| e.id.as_str()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 27);
    assert!(catalog().iter().all(|e| !e.label.is_empty()));
    assert_eq!(entry("IV.pot").unwrap().item, 26);
    assert!(matches!(entry("VI.1"), Err(SolutionError::UnknownEntry(_))));
}

#[test]
fn field_symbols_are_declared() {
    for e in catalog() {
        let allowed = allowed_symbols(e);
        for f in field_exprs(e).unwrap() {
            for s in f.symbols() {
                assert!(allowed.contains(&s), "{}: undeclared symbol {}", e.id, s);
            }
        }
    }
}

#[test]
fn predicates_parse() {
    for e in catalog() {
        let c = e.corrected();
        let mut preds: Vec<&String> = e.constraints.iter().chain(&e.requires).collect();
        for v in e.content.variants.iter().chain(&c.variants) {
            preds.extend(&v.constraints);
        }
        for p in preds {
            assert!(constraint(p, &[]).is_ok(), "{}: {}", e.id, p);
        }
        parse_conditions(&e.conditions).unwrap();
    }
}

#[test]
fn instantiate_log_solution() {
    let e = entry("I.1").unwrap();
    let f = instantiate(e, &vals(&[("p", 1.0), ("C1", 0.0), ("C2", 0.0), ("C3", 1.0), ("C4", 0.0)])).unwrap();
    for x in [0.5, 1.0, 3.0] {
        assert!((at(&f["u0"], &[("x", x)]) - x.ln()).abs() < 1e-15);
        assert!((at(&f["u1"], &[("x", x)]) - 1.0 / x).abs() < 1e-15);
    }
}

#[test]
fn instantiate_zero_constants() {
    let e = entry("III.17").unwrap();
    let z = vals(&[("C1", 0.0), ("C2", 0.0), ("C3", 0.0), ("C4", 0.0)]);
    let f = instantiate(e, &z).unwrap();
    assert!(f["u0"].is_zero() && f["u1"].is_zero());
}

#[test]
fn potential_exponents() {
    let e = entry("V.pot").unwrap();
    let v = &e.content.variants[0];
    let conds = parse_conditions(&v.conditions).unwrap();
    let get = |n: &str| conds.iter().find(|(k, _)| k == n).unwrap().1.clone();
    assert!((at(&get("r1"), &[("f0", 2.0)]) - 2.0).abs() < 1e-15);
    assert!((at(&get("r2"), &[("f0", 2.0)]) + 1.0).abs() < 1e-15);
}

#[test]
fn power_profile_value() {
    let e = entry("II.10").unwrap();
    let g = px(&e.content.odes[0].given["F"]).unwrap();
    let v = at(&g, &[("sgn", 1.0), ("f0", 1.0), ("p", 1.0), ("t0", 0.0), ("xi", 2.0)]);
    assert!((v - 0.25).abs() < 1e-15);
    let r = verify(e, &VerifyConfig::default()).unwrap();
    let c = r.checks.iter().find(|c| c.name == "ode:solution10e").unwrap();
    assert!(c.pass(), "{:?}", c);
}

#[test]
fn consistency_condition_rejects_draws() {
    let e = entry("II.11").unwrap();
    match instantiate(e, &vals(&[("a", 0.5), ("p", 1.0), ("R", 1.0)])) {
        Err(SolutionError::Constraint(p)) => assert!(p.contains("a*(a+2)*(2*p+1)")),
        other => panic!("{:?}", other),
    }
    assert!(instantiate(e, &vals(&[("a", 0.0), ("p", 1.0), ("R", 1.0)])).is_ok());
    assert!(instantiate(e, &vals(&[("a", 0.5), ("p", -0.5), ("R", 1.0)])).is_ok());
}

#[test]
fn log_solution_verifies_tightly() {
    let r = verify(entry("I.1").unwrap(), &VerifyConfig::default()).unwrap();
    assert!(r.pass);
    assert!(r.max() < 1e-12, "{}", r.max());
    assert!(r.samples >= 100);
}

#[test]
fn printed_relation_fails_corrected_passes() {
    let r = verify(entry("I.6").unwrap(), &VerifyConfig::default()).unwrap();
    assert!(r.pass && r.discrepancy());
    let printed = r.printed.unwrap();
    assert!(!printed.pass);
    assert!(printed.residuals["implicit:solution6AAA"] > 1e-3);
    assert!(r.residuals["implicit:solution6AAA"] < 1e-9);
}

#[test]
fn periodic_damping_as_printed() {
    let r = verify(entry("I.7").unwrap(), &VerifyConfig::default()).unwrap();
    let printed = r.printed.unwrap();
    assert!(printed.residuals["s=(1+sqrt(2))/2/E0"] < 1e-9);
    assert!(printed.residuals["s=(1+sqrt(2))/2/E1"] > 1e-3);
}

#[test]
fn every_entry_passes() {
    let all: Vec<&SolutionEntry> = catalog().iter().collect();
    let reps = verify_all(&all, &VerifyConfig::default());
    for (e, r) in all.iter().zip(&reps) {
        let r = r.as_ref().unwrap();
        assert_eq!(r.id, e.id);
        assert_eq!(r.pass, r.checks.iter().all(Check::pass), "{}", e.id);
        assert!(r.pass, "{}: {:?}", e.id, r.checks.iter().filter(|c| !c.pass()).collect::<Vec<_>>());
        if let Some(p) = &r.printed {
            assert!(!p.pass, "{} printed form passes", e.id);
        }
    }
    let again = verify_all(&all, &VerifyConfig::default());
    assert_eq!(
        reps.iter().map(|r| r.as_ref().unwrap().residuals.clone()).collect::<Vec<_>>(),
        again.iter().map(|r| r.as_ref().unwrap().residuals.clone()).collect::<Vec<_>>()
    );
}

#[test]
fn quadrature_matches_closed_form() {
    let e = entry("IV.pot").unwrap();
    for (p, f0) in [(1.0, 1.0), (0.5, 2.0)] {
        let set = vals(&[("p", p), ("f0", f0), ("K", 0.0), ("t0", 0.0), ("s", 0.0), ("l0", 0.0)]);
        let grid = quadrature_grid(e, &set).unwrap();
        assert!((grid[0] + 2.0).abs() < 1e-15 && (grid[grid.len() - 1] + 0.1).abs() < 1e-15);
        let table = quadrature_solve(e, &set, &grid).unwrap();
        for (t, f) in table.t.iter().zip(&table.f) {
            let want = -2.0 * p * (f0.sqrt() * -t).ln();
            assert!((f - want).abs() < 1e-8, "t={t} F={f} want {want}");
        }
        assert!(table.f.windows(2).all(|w| w[1] > w[0]));
    }
}

fn constant_quadrature(integrand: &str, bracket: (f64, f64)) -> SolutionEntry {
    let mut e = entry("I.2").unwrap().clone();
    let q = e.quadrature.as_mut().unwrap();
    q.integrand = integrand.into();
    q.anchor = ("0.5".into(), "1".into());
    q.bracket = bracket;
    e
}

#[test]
fn constant_integrand_is_linear() {
    let e = constant_quadrature("1/3", (-20.0, 20.0));
    let grid: Vec<f64> = (0..11).map(|i| -1.0 + 0.3 * i as f64).collect();
    let table = quadrature_solve(&e, &BTreeMap::new(), &grid).unwrap();
    for (t, f) in table.t.iter().zip(&table.f) {
        assert!((f - (1.0 + 3.0 * (t - 0.5))).abs() < 1e-12);
    }
}

#[test]
fn quadrature_errors() {
    let e = constant_quadrature("1/3", (-2.0, 2.0));
    let r = quadrature_solve(&e, &BTreeMap::new(), &[0.5, 3.0]);
    assert!(matches!(r, Err(SolutionError::Num(NumError::NoSignChange { .. }))), "{:?}", r);
    let e = constant_quadrature("F", (-2.0, 2.0));
    assert!(matches!(quadrature_solve(&e, &BTreeMap::new(), &[0.5]), Err(SolutionError::Integrand(_))));
    let e = entry("I.1").unwrap();
    assert!(matches!(quadrature_grid(e, &BTreeMap::new()), Err(SolutionError::NoQuadrature(_))));
}

#[test]
fn conditions_and_values_parse() {
    let c = parse_conditions(&["a = -1".into(), "D = xi/sqrt(f0)+C0".into()]).unwrap();
    assert_eq!(c[0].0, "a");
    let e = impose(&ex("a*D"), &c);
    assert!((at(&e, &[("xi", 2.0), ("f0", 4.0), ("C0", 0.0)]) + 1.0).abs() < 1e-15);
    assert!(parse_conditions(&["a + 1".into()]).is_err());
    let v = parse_values(&["p = 1/2".into(), "f0 = 2".into()]).unwrap();
    assert_eq!(v["p"], 0.5);
}

#[test]
fn report_serializes() {
    let r = verify(entry("III.16").unwrap(), &VerifyConfig { samples: 20, seed: 1 }).unwrap();
    let j = serde_json::to_value(&r).unwrap();
    assert_eq!(j["id"], "III.16");
    assert_eq!(j["mode"], "closed-form");
    assert!(j["printed"]["pass"] == false);
    assert!(j.get("checks").is_none());
}

#[test]
fn flows_map_solutions_to_solutions() {
    let cfg = VerifyConfig::default();
    for (id, gen, tau) in
        [("I.1", "X4", 0.3), ("I.1", "X3", 0.2), ("III.16", "X5", 0.1), ("III.19", "X5", 0.1), ("II.8", "X2", 0.4)]
    {
        let r = verify_flow(entry(id).unwrap(), gen, tau, &cfg).unwrap();
        assert!(r.pass, "{id} {gen}: {:?}", r.residuals);
    }
    assert!(matches!(verify_flow(entry("III.20").unwrap(), "X1", 0.1, &cfg), Err(SolutionError::NoFields(_))));
    assert!(verify_flow(entry("I.1").unwrap(), "X9", 0.1, &cfg).is_err());
}
