//! Invariant ansatze: insertion into the split equations, the check that the
//! result depends on the symmetry variable only, and comparison with
//! hand-derived reduced ODEs.

use crate::exprcore::{
    differentiate, evaluate, map_funcs, parse, scaled_gap, scaled_residual, simplify, subs, Domain, Env, EvalError,
    Expr, ParseError,
};
use crate::liealg::{CaseId, LieAlgebraCase, LieError, VectorField};
use crate::models::{insert_fields, ModelError, PDESystemPair};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Unknown functions of the symmetry variable.
pub const UNKNOWNS: [&str; 3] = ["F", "G", "H"];

/// Symbol standing for the `n`-th derivative of an unknown: `F`, `F_1`, `F_2`, ...
pub fn fjet(name: &str, n: u32) -> String {
    if n == 0 {
        name.to_string()
    } else {
        format!("{}_{}", name, n)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("expression `{text}`: {err}")]
    Parse { text: String, err: ParseError },
    #[error("normalization factor vanishes at t = {t}, x = {x}")]
    FactorVanishes { t: f64, x: f64 },
    #[error("no equation `{0}` in the pair")]
    UnknownEquation(String),
    #[error("sampling exhausted after {0} domain violations")]
    DomainExhausted(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("sample outside the admissible region")]
    Retry,
}

pub(crate) fn px(text: &str) -> Result<Expr, ReductionError> {
    parse(text).map_err(|err| ReductionError::Parse { text: text.to_string(), err })
}

/// Serialized form of an ansatz as stored in the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzDoc {
    pub xi: String,
    /// One of `t`, `x` solved from `xi`, as `[coordinate, expression in xi and the other]`.
    pub section: (String, String),
    pub forms: BTreeMap<String, String>,
    #[serde(default)]
    pub factors: BTreeMap<String, String>,
    #[serde(default)]
    pub invariants: Vec<String>,
}

/// Similarity form of the fields for one subalgebra.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionAnsatz {
    pub entry: String,
    pub case: CaseId,
    pub generator: String,
    pub xi: Expr,
    pub section: (String, Expr),
    /// Field forms in `t`, `x` and applications `F(xi)`, `G(xi)`, ...
    pub forms: BTreeMap<String, Expr>,
    pub factors: BTreeMap<String, Expr>,
    pub invariants: Vec<Expr>,
}

impl ReductionAnsatz {
    pub fn from_doc(
        entry: &str,
        case: CaseId,
        generator: &str,
        doc: &AnsatzDoc,
    ) -> Result<ReductionAnsatz, ReductionError> {
        let xi = px(&doc.xi)?;
        let mut forms = BTreeMap::new();
        for (k, v) in &doc.forms {
            forms.insert(k.clone(), subs(&px(v)?, &[("xi", xi.clone())]));
        }
        let mut factors = BTreeMap::new();
        for (k, v) in &doc.factors {
            factors.insert(k.clone(), px(v)?);
        }
        let invariants = doc.invariants.iter().map(|s| px(s)).collect::<Result<_, _>>()?;
        Ok(ReductionAnsatz {
            entry: entry.to_string(),
            case,
            generator: generator.to_string(),
            xi,
            section: (doc.section.0.clone(), px(&doc.section.1)?),
            forms,
            factors,
            invariants,
        })
    }

    /// Same forms with a different symmetry variable (for negative controls).
    pub fn with_xi(&self, xi: Expr, section: (String, Expr)) -> ReductionAnsatz {
        let old = self.xi.clone();
        let mut out = self.clone();
        out.forms = self
            .forms
            .iter()
            .map(|(k, v)| {
                let e = map_funcs(v, &|fa| {
                    (UNKNOWNS.contains(&&*fa.name) && fa.args.len() == 1 && fa.args[0] == old)
                        .then(|| Expr::func(&fa.name, vec![xi.clone()], fa.orders.to_vec()))
                });
                (k.clone(), e)
            })
            .collect();
        out.xi = xi;
        out.section = section;
        out
    }

    /// Applies `f` to every stored expression (used to impose parameter conditions).
    pub fn map_exprs(&self, f: &impl Fn(&Expr) -> Expr) -> ReductionAnsatz {
        let mut out = self.clone();
        out.xi = f(&self.xi);
        out.section.1 = f(&self.section.1);
        out.forms = self.forms.iter().map(|(k, v)| (k.clone(), f(v))).collect();
        out.factors = self.factors.iter().map(|(k, v)| (k.clone(), f(v))).collect();
        out.invariants = self.invariants.iter().map(f).collect();
        out
    }

    pub fn factor(&self, eq: &str) -> Expr {
        self.factors.get(eq).cloned().unwrap_or_else(Expr::one)
    }

    pub fn other_coord(&self) -> &'static str {
        if self.section.0 == "x" {
            "t"
        } else {
            "x"
        }
    }
}

/// Replaces applications of the unknowns by jet symbols.
pub fn to_fjets(e: &Expr) -> Expr {
    map_funcs(e, &|fa| {
        (UNKNOWNS.contains(&&*fa.name) && fa.args.len() == 1).then(|| Expr::sym(&fjet(&fa.name, fa.orders[0])))
    })
}

/// Residuals of every equation of `pair` after inserting the ansatz, as
/// expressions in `t`, `x`, parameters and the jet symbols of the unknowns.
pub fn apply_ansatz(pair: &PDESystemPair, ansatz: &ReductionAnsatz) -> Result<Vec<(String, Expr)>, ReductionError> {
    let mut out = Vec::new();
    for (name, e) in &pair.equations {
        let r = insert_fields(e, &ansatz.forms)?;
        out.push((name.clone(), simplify(&to_fjets(&r))));
    }
    Ok(out)
}

/// Outcome of the paired-point test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiOnlyReport {
    pub pass: bool,
    pub max_gap: f64,
    pub pairs: usize,
}

/// Random values in `[0.5, 1.5)` for every jet of the unknowns up to third
/// order that `env` does not bind yet.
pub fn jet_env<R: Rng + ?Sized>(env: &mut Env, rng: &mut R) {
    for u in UNKNOWNS {
        for n in 0..=3 {
            let name = fjet(u, n);
            if env.get(&name).is_none() {
                env.set(&name, rng.gen_range(0.5..1.5));
            }
        }
    }
}

fn gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn is_domain(e: &ReductionError) -> bool {
    matches!(e, ReductionError::Eval(EvalError::Domain { .. }) | ReductionError::Retry)
}

/// Evaluates `r / factor` at pairs of points of `dom` sharing the value of
/// the symmetry variable, with one random jet per pair. `dom` must bind `t`,
/// `x` and every parameter; its constraints are enforced at both points.
pub fn check_xi_only<R: Rng + ?Sized>(
    r: &Expr,
    factor: &Expr,
    ansatz: &ReductionAnsatz,
    dom: &Domain,
    pairs: usize,
    tol: f64,
    rng: &mut R,
) -> Result<XiOnlyReport, ReductionError> {
    let other = ansatz.other_coord();
    let range = dom.intervals.get(other).copied().unwrap_or((0.5, 2.0));
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut retries = 0;
    while done < pairs {
        let mut env = dom.sample(rng);
        jet_env(&mut env, rng);
        let attempt = (|| -> Result<f64, ReductionError> {
            let (t1, x1) = (env.get("t").unwrap_or(f64::NAN), env.get("x").unwrap_or(f64::NAN));
            let f1 = evaluate(factor, &env)?;
            if f1 == 0.0 {
                return Err(ReductionError::FactorVanishes { t: t1, x: x1 });
            }
            let v1 = evaluate(r, &env)? / f1;
            let xi = evaluate(&ansatz.xi, &env)?;
            let mut env2 = env.clone();
            env2.set(other, rng.gen_range(range.0..range.1));
            env2.set("xi", xi);
            let c = evaluate(&ansatz.section.1, &env2)?;
            env2.set(&ansatz.section.0, c);
            if !dom.admits(&env2) {
                return Err(ReductionError::Retry);
            }
            let f2 = evaluate(factor, &env2)?;
            if f2 == 0.0 {
                return Err(ReductionError::FactorVanishes { t: env2.get("t").unwrap(), x: env2.get("x").unwrap() });
            }
            let v2 = evaluate(r, &env2)? / f2;
            Ok(gap(v1, v2))
        })();
        match attempt {
            Ok(g) => {
                worst = worst.max(g);
                done += 1;
            }
            Err(e) if is_domain(&e) => {
                retries += 1;
                if retries > dom.max_retries {
                    return Err(ReductionError::DomainExhausted(retries));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(XiOnlyReport { pass: worst < tol, max_gap: worst, pairs })
}

/// A hand-derived reduced equation to compare against the machine form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeDoc {
    /// Equation of the pair it reduces (`E0`, `E1`, `P0b`, ...).
    pub eq: String,
    pub label: String,
    /// Left side in `xi`, parameters and jets `F`, `F_1`, ... (or `F(xi)`, `F'(xi)`, `Diff(F, xi, 2)`).
    pub lhs: String,
    /// Closed forms in `xi` substituted for unknowns on both sides.
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    /// Parameter assignments `name = expr` valid for this equation only.
    #[serde(default)]
    pub conditions: Vec<String>,
    /// Replace the jets of the implicitly defined unknown by those of the entry's relation.
    #[serde(default)]
    pub implicit: bool,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeMatch {
    pub eq: String,
    pub label: String,
    pub matched: bool,
    pub max_gap: f64,
}

/// Jets `F, F_1, .., F_3` of closed forms in `xi`.
pub fn given_jets(given: &BTreeMap<String, Expr>) -> Result<Vec<(String, Expr)>, ReductionError> {
    let mut out = Vec::new();
    for (name, e) in given {
        let mut e = e.clone();
        for n in 0..=3 {
            out.push((fjet(name, n), e.clone()));
            e = simplify(&differentiate(&e, "xi").map_err(ModelError::from)?);
        }
    }
    Ok(out)
}

pub fn subs_owned(e: &Expr, pairs: &[(String, Expr)]) -> Expr {
    let refs: Vec<(&str, Expr)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    subs(e, &refs)
}

/// Largest scaled gap between `machine / factor` and `printed` over `dom`,
/// after replacing jets by `jets` on both sides. The symbol `xi` is bound to
/// the value of the symmetry variable at each point.
pub fn match_reduced_ode<R: Rng + ?Sized>(
    machine: &Expr,
    factor: &Expr,
    printed: &Expr,
    xi: &Expr,
    jets: &[(String, Expr)],
    dom: &Domain,
    samples: usize,
    rng: &mut R,
) -> Result<f64, ReductionError> {
    let m = subs(&subs_owned(&(machine / factor), jets), &[("xi", xi.clone())]);
    let printed = subs_owned(&to_fjets(printed), jets);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut retries = 0;
    while done < samples {
        let mut env = dom.sample(rng);
        jet_env(&mut env, rng);
        let res = evaluate(xi, &env).and_then(|v| {
            env.set("xi", v);
            scaled_gap(&m, &printed, &env)
        });
        match res {
            Ok(g) => {
                worst = worst.max(g);
                done += 1;
            }
            Err(EvalError::Domain { .. }) => {
                retries += 1;
                if retries > dom.max_retries {
                    return Err(ReductionError::DomainExhausted(retries));
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(worst)
}

/// Implicit definition `xi = psi(F) + xi0` of an unknown, given through `psi`
/// or its derivative `psi'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitDoc {
    pub label: String,
    #[serde(default = "default_func")]
    pub func: String,
    /// Equation of the pair the relation should solve.
    #[serde(default = "default_eq")]
    pub eq: String,
    #[serde(default)]
    pub psi_prime: Option<String>,
    #[serde(default)]
    pub psi: Option<String>,
    /// Sampling interval for the value of the unknown.
    pub range: (f64, f64),
    #[serde(default)]
    pub conditions: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

fn default_func() -> String {
    "F".into()
}

fn default_eq() -> String {
    "E0".into()
}

/// Jets of `F` implied by `dxi/dF = psi'(F)`, as expressions in `F`.
pub fn implicit_jets(func: &str, psi_prime: &Expr) -> Result<Vec<(String, Expr)>, ReductionError> {
    let d =
        |e: &Expr| -> Result<Expr, ReductionError> { Ok(simplify(&differentiate(e, func).map_err(ModelError::from)?)) };
    let j1 = simplify(&(Expr::one() / psi_prime));
    let j2 = simplify(&(d(&j1)? * &j1));
    let j3 = simplify(&(d(&j2)? * &j1));
    Ok(vec![(fjet(func, 1), j1), (fjet(func, 2), j2), (fjet(func, 3), j3)])
}

/// `psi'` of a relation, differentiating `psi` when only that is given.
pub fn relation_psi_prime(rel: &ImplicitDoc) -> Result<Expr, ReductionError> {
    match (&rel.psi_prime, &rel.psi) {
        (Some(pp), _) => px(pp),
        (None, Some(psi)) => Ok(simplify(&differentiate(&px(psi)?, &rel.func).map_err(ModelError::from)?)),
        (None, None) => Err(ReductionError::Parse {
            text: rel.label.clone(),
            err: ParseError::Syntax { offset: 0, msg: "relation needs psi or psi_prime".into() },
        }),
    }
}

/// Largest scaled residual of `machine / factor` on the curve defined by an
/// implicit relation. `dom` must bind the unknown itself (e.g. `F`) together
/// with `t`, `x` and the parameters; jets of other unknowns are random. When
/// `psi` is given the point is moved onto `xi = psi(F)` along the section.
pub fn implicit_residual<R: Rng + ?Sized>(
    machine: &Expr,
    factor: &Expr,
    ansatz: &ReductionAnsatz,
    func: &str,
    psi_prime: &Expr,
    psi: Option<&Expr>,
    dom: &Domain,
    samples: usize,
    rng: &mut R,
) -> Result<f64, ReductionError> {
    let jets = implicit_jets(func, psi_prime)?;
    let m = simplify(&subs_owned(&(machine / factor), &jets));
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut retries = 0;
    while done < samples {
        let mut env = dom.sample(rng);
        jet_env(&mut env, rng);
        let res = (|| -> Result<f64, ReductionError> {
            if let Some(psi) = psi {
                let xi = evaluate(psi, &env)?;
                env.set("xi", xi);
                let c = evaluate(&ansatz.section.1, &env)?;
                env.set(&ansatz.section.0, c);
                if !dom.admits(&env) {
                    return Err(ReductionError::Retry);
                }
            }
            Ok(scaled_residual(&m, &env)?)
        })();
        match res {
            Ok(g) => {
                worst = worst.max(g);
                done += 1;
            }
            Err(e) if is_domain(&e) => {
                retries += 1;
                if retries > dom.max_retries {
                    return Err(ReductionError::DomainExhausted(retries));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// Symbolic combination `sum_i c_i X_i` from text such as `X3+a*X4`.
pub fn generator_field(case: &LieAlgebraCase, text: &str) -> Result<VectorField, ReductionError> {
    let e = px(text)?;
    let mut coeffs = Vec::new();
    for n in &case.names {
        coeffs.push(simplify(&differentiate(&e, n).map_err(ModelError::from)?));
    }
    Ok(case.combine(&coeffs))
}

/// Largest scaled value of the generator applied to the symmetry variable and
/// to each invariant combination. `dom` must bind every chart coordinate.
pub fn annihilation_gap<R: Rng + ?Sized>(
    ansatz: &ReductionAnsatz,
    dom: &Domain,
    samples: usize,
    rng: &mut R,
) -> Result<f64, ReductionError> {
    let case = LieAlgebraCase::new(ansatz.case)?;
    let v = generator_field(&case, &ansatz.generator)?;
    let mut worst: f64 = 0.0;
    for target in std::iter::once(&ansatz.xi).chain(&ansatz.invariants) {
        let applied = simplify(&v.apply(target));
        let g = crate::exprcore::max_gap(&applied, &Expr::zero(), dom, samples, rng)
            .map_err(|_| ReductionError::DomainExhausted(dom.max_retries))?;
        worst = worst.max(g);
    }
    Ok(worst)
}
