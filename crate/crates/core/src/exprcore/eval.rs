use super::expr::{Builtin, Expr, FuncApp};
use num::{Signed, ToPrimitive};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Numeric implementation of an unknown function.
///
/// Called with the derivative multi-order and the argument values; returning
/// `None` for a nonzero order makes the evaluator fall back to central
/// differences of the order-zero values.
pub type FuncImpl = Arc<dyn Fn(&[u32], &[f64]) -> Option<f64> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("unbound function `{0}`")]
    UnboundFunc(String),
    #[error("domain violation in `{subterm}`: {reason}")]
    Domain { subterm: String, reason: String },
}

fn domain(e: &Expr, reason: &str) -> EvalError {
    EvalError::Domain { subterm: e.to_string(), reason: reason.to_string() }
}

/// Numeric bindings for symbols and unknown functions.
#[derive(Clone, Default)]
pub struct Env {
    vars: BTreeMap<String, f64>,
    funcs: BTreeMap<String, FuncImpl>,
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Env").field("vars", &self.vars).field("funcs", &self.funcs.keys().collect::<Vec<_>>()).finish()
    }
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.vars.insert(name.to_string(), v);
        self
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.vars.insert(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vars.get(name).copied()
    }

    pub fn vars(&self) -> &BTreeMap<String, f64> {
        &self.vars
    }

    pub fn set_func(&mut self, name: &str, f: FuncImpl) {
        self.funcs.insert(name.to_string(), f);
    }

    pub fn with_func(mut self, name: &str, f: FuncImpl) -> Self {
        self.set_func(name, f);
        self
    }

    /// Binds a function known only through its values; derivatives use finite differences.
    pub fn with_values(self, name: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.with_func(
            name,
            Arc::new(move |ord: &[u32], a: &[f64]| if ord.iter().all(|&o| o == 0) { Some(f(a)) } else { None }),
        )
    }

    pub fn has_func(&self, name: &str) -> bool {
        self.funcs.contains_key(name)
    }
}

/// Step for an n-th order central difference.
pub fn fd_step(order: u32) -> f64 {
    if order <= 1 {
        1e-5
    } else {
        f64::EPSILON.powf(1.0 / (order as f64 + 2.0))
    }
}

pub fn evaluate(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    let v = eval_inner(e, env)?;
    if !v.is_finite() {
        return Err(domain(e, "non-finite value"));
    }
    Ok(v)
}

fn eval_inner(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    match e {
        Expr::Num(r) => Ok(r.to_f64().unwrap_or(f64::NAN)),
        Expr::Sym(s) => env.get(s).ok_or_else(|| EvalError::Unbound(s.to_string())),
        Expr::Add(ts) => {
            let mut acc = 0.0;
            for t in ts.iter() {
                acc += eval_inner(t, env)?;
            }
            Ok(acc)
        }
        Expr::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs.iter() {
                acc *= eval_inner(f, env)?;
            }
            Ok(acc)
        }
        Expr::Pow(be) => {
            let b = eval_inner(&be.0, env)?;
            let x = eval_inner(&be.1, env)?;
            let v = if b < 0.0 && x.fract() != 0.0 {
                // real odd roots of negatives
                match be.1.as_num() {
                    Some(r) if r.denom().is_odd_int() => {
                        let m = (-b).powf(x);
                        if r.numer().is_odd_int() {
                            -m
                        } else {
                            m
                        }
                    }
                    _ => return Err(domain(e, "negative base with non-integer exponent")),
                }
            } else {
                if b == 0.0 && x < 0.0 {
                    return Err(domain(e, "zero to a negative power"));
                }
                b.powf(x)
            };
            if !v.is_finite() {
                return Err(domain(e, "non-finite power"));
            }
            Ok(v)
        }
        Expr::Call(f, a) => {
            let v = eval_inner(a, env)?;
            let out = match f {
                Builtin::Ln => {
                    if v <= 0.0 {
                        return Err(domain(e, "logarithm of a non-positive number"));
                    }
                    v.ln()
                }
                Builtin::Exp => v.exp(),
                Builtin::Sqrt => {
                    if v < 0.0 {
                        return Err(domain(e, "square root of a negative number"));
                    }
                    v.sqrt()
                }
                Builtin::Sin => v.sin(),
                Builtin::Cos => v.cos(),
                Builtin::Abs => v.abs(),
            };
            if !out.is_finite() {
                return Err(domain(e, "non-finite value"));
            }
            Ok(out)
        }
        Expr::Func(fa) => {
            let f = env.funcs.get(&*fa.name).ok_or_else(|| EvalError::UnboundFunc(fa.name.to_string()))?;
            let mut args = Vec::with_capacity(fa.args.len());
            for a in &fa.args {
                args.push(eval_inner(a, env)?);
            }
            let h = fd_step(fa.total_order());
            eval_func(e, fa, f, &fa.orders, &args, h)
        }
    }
}

fn eval_func(e: &Expr, fa: &FuncApp, f: &FuncImpl, orders: &[u32], args: &[f64], h: f64) -> Result<f64, EvalError> {
    if let Some(v) = f(orders, args) {
        if !v.is_finite() {
            return Err(domain(e, "function returned a non-finite value"));
        }
        return Ok(v);
    }
    let i = match orders.iter().position(|&o| o > 0) {
        Some(i) => i,
        None => return Err(domain(e, &format!("function `{}` has no value here", fa.name))),
    };
    let mut lower = orders.to_vec();
    lower[i] -= 1;
    let mut ap = args.to_vec();
    let mut am = args.to_vec();
    ap[i] += h;
    am[i] -= h;
    let vp = eval_func(e, fa, f, &lower, &ap, h)?;
    let vm = eval_func(e, fa, f, &lower, &am, h)?;
    Ok((vp - vm) / (2.0 * h))
}

trait OddInt {
    fn is_odd_int(&self) -> bool;
}

impl OddInt for num::BigInt {
    fn is_odd_int(&self) -> bool {
        let two = num::BigInt::from(2);
        (self.abs() % two) == num::BigInt::from(1)
    }
}
