use super::eval::{evaluate, Env, EvalError};
use super::expr::Expr;
use super::parse::{parse, ParseError};
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("sampling hit domain violations {retries} times; last: {last}")]
    DomainExhausted { retries: usize, last: String },
    #[error(transparent)]
    Eval(EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Eq,
}

/// Admissibility predicate `lhs op rhs` on sampled points, such as `x+C1 > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub lhs: Expr,
    pub op: Cmp,
    pub rhs: Expr,
}

impl Constraint {
    pub fn parse(text: &str) -> Result<Constraint, ParseError> {
        for (tok, op) in
            [("==", Cmp::Eq), (">=", Cmp::Ge), ("<=", Cmp::Le), ("!=", Cmp::Ne), (">", Cmp::Gt), ("<", Cmp::Lt)]
        {
            if let Some(i) = text.find(tok) {
                let lhs = parse(&text[..i])?;
                let rhs = parse(&text[i + tok.len()..]).map_err(|e| e.shifted(i + tok.len()))?;
                return Ok(Constraint { lhs, op, rhs });
            }
        }
        Err(ParseError::Syntax { offset: 0, msg: "expected a comparison".into() })
    }

    /// False when either side fails to evaluate.
    pub fn holds(&self, env: &Env) -> bool {
        let (Ok(a), Ok(b)) = (evaluate(&self.lhs, env), evaluate(&self.rhs, env)) else {
            return false;
        };
        match self.op {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
            Cmp::Ne => (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())),
            Cmp::Eq => (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())),
        }
    }
}

/// Sampling region: a uniform interval per free symbol plus fixed bindings,
/// restricted by admissibility predicates.
#[derive(Clone, Debug, Default)]
pub struct Domain {
    pub intervals: BTreeMap<String, (f64, f64)>,
    pub base: Env,
    pub constraints: Vec<Constraint>,
    pub max_retries: usize,
}

impl Domain {
    pub fn new() -> Self {
        Domain { intervals: BTreeMap::new(), base: Env::new(), constraints: Vec::new(), max_retries: 200 }
    }

    pub fn constrain(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn var(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.intervals.insert(name.to_string(), (lo, hi));
        self
    }

    pub fn fixed(mut self, name: &str, v: f64) -> Self {
        self.base.set(name, v);
        self
    }

    pub fn with_env(mut self, env: Env) -> Self {
        self.base = env;
        self
    }

    /// Draws until every constraint holds; after `50 * max_retries` misses the
    /// last draw is returned as is, so evaluation may then hit a domain error.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Env {
        let mut env = self.base.clone();
        for _ in 0..50 * self.max_retries.max(1) {
            for (k, (lo, hi)) in &self.intervals {
                let v = if hi > lo { rng.gen_range(*lo..*hi) } else { *lo };
                env.set(k, v);
            }
            if self.admits(&env) {
                break;
            }
        }
        env
    }

    pub fn admits(&self, env: &Env) -> bool {
        self.constraints.iter().all(|c| c.holds(env))
    }
}

fn term_values(e: &Expr, env: &Env, sign: f64, out: &mut Vec<f64>) -> Result<(), EvalError> {
    match e {
        Expr::Add(ts) => {
            for t in ts.iter() {
                out.push(sign * evaluate(t, env)?);
            }
        }
        other => out.push(sign * evaluate(other, env)?),
    }
    Ok(())
}

/// Scale-relative gap between two expressions at one point.
///
/// The top-level terms of `e1` and of `-e2` are evaluated and split by
/// numerical sign into P and N; the gap is `|P - N| / (1 + max(P, N))`.
/// For single-term sides this is the usual `|e1 - e2| / (1 + max)`; for a
/// residual compared against zero it measures cancellation relative to the
/// size of the terms that cancel.
pub fn scaled_gap(e1: &Expr, e2: &Expr, env: &Env) -> Result<f64, EvalError> {
    let mut vals = Vec::new();
    term_values(e1, env, 1.0, &mut vals)?;
    term_values(e2, env, -1.0, &mut vals)?;
    let p: f64 = vals.iter().filter(|v| **v > 0.0).sum();
    let n: f64 = -vals.iter().filter(|v| **v < 0.0).sum::<f64>();
    Ok((p - n).abs() / (1.0 + p.max(n)))
}

/// Residual of a single expression against zero in the same convention.
pub fn scaled_residual(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    scaled_gap(e, &Expr::zero(), env)
}

/// Randomized zero test of `e1 - e2` over `domain`.
pub fn equivalent<R: Rng + ?Sized>(
    e1: &Expr,
    e2: &Expr,
    domain: &Domain,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<bool, EquivError> {
    Ok(max_gap(e1, e2, domain, trials, rng)? <= tol)
}

/// Largest scaled gap seen over `trials` valid samples.
pub fn max_gap<R: Rng + ?Sized>(
    e1: &Expr,
    e2: &Expr,
    domain: &Domain,
    trials: usize,
    rng: &mut R,
) -> Result<f64, EquivError> {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut retries = 0;
    while done < trials {
        let env = domain.sample(rng);
        match scaled_gap(e1, e2, &env) {
            Ok(g) => {
                worst = worst.max(g);
                done += 1;
            }
            Err(EvalError::Domain { subterm, reason }) => {
                retries += 1;
                if retries > domain.max_retries {
                    return Err(EquivError::DomainExhausted { retries, last: format!("{}: {}", subterm, reason) });
                }
            }
            Err(e) => return Err(EquivError::Eval(e)),
        }
    }
    Ok(worst)
}
