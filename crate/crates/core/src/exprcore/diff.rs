use super::expr::{Builtin, Expr, FuncApp};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("unsigned abs derivative: abs({0})")]
    UnsignedAbs(String),
}

/// Symbolic differentiation with optional sign facts for `abs` arguments.
///
/// A chart constraint such as `x + C1 > 0` is recorded with
/// [`Differentiator::with_sign`]; `abs` of any other argument refuses to
/// differentiate.
#[derive(Debug, Clone, Default)]
pub struct Differentiator {
    signs: BTreeMap<Expr, i8>,
}

impl Differentiator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sign(mut self, arg: Expr, sign: i8) -> Self {
        self.signs.insert(arg, sign.signum());
        self
    }

    pub fn diff(&self, e: &Expr, var: &str) -> Result<Expr, DiffError> {
        if !e.contains_sym(var) {
            return Ok(Expr::zero());
        }
        Ok(match e {
            Expr::Num(_) => Expr::zero(),
            Expr::Sym(s) => {
                if &**s == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(ts) => {
                let mut v = Vec::with_capacity(ts.len());
                for t in ts.iter() {
                    v.push(self.diff(t, var)?);
                }
                Expr::add(v)
            }
            Expr::Mul(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let d = self.diff(&fs[i], var)?;
                    if d.is_zero() {
                        continue;
                    }
                    let mut prod: Vec<Expr> = Vec::with_capacity(fs.len());
                    for (j, f) in fs.iter().enumerate() {
                        prod.push(if i == j { d.clone() } else { f.clone() });
                    }
                    terms.push(Expr::mul(prod));
                }
                Expr::add(terms)
            }
            Expr::Pow(be) => {
                let (b, x) = (&be.0, &be.1);
                let db = self.diff(b, var)?;
                if !x.contains_sym(var) {
                    // x * b^(x-1) * b'
                    Expr::mul(vec![x.clone(), Expr::pow(b.clone(), x - Expr::one()), db])
                } else {
                    let dx = self.diff(x, var)?;
                    let inner = Expr::add(vec![
                        Expr::mul(vec![dx, b.clone().ln()]),
                        Expr::mul(vec![x.clone(), db, Expr::pow(b.clone(), Expr::int(-1))]),
                    ]);
                    Expr::mul(vec![e.clone(), inner])
                }
            }
            Expr::Call(f, a) => {
                let da = self.diff(a, var)?;
                let a = (**a).clone();
                let outer = match f {
                    Builtin::Ln => Expr::pow(a, Expr::int(-1)),
                    Builtin::Exp => e.clone(),
                    Builtin::Sqrt => Expr::rational(1, 2) * Expr::pow(a, Expr::rational(-1, 2)),
                    Builtin::Sin => a.cos(),
                    Builtin::Cos => -a.sin(),
                    Builtin::Abs => match self.signs.get(&a) {
                        Some(s) => Expr::int(*s as i64),
                        None => return Err(DiffError::UnsignedAbs(a.to_string())),
                    },
                };
                Expr::mul(vec![outer, da])
            }
            Expr::Func(fa) => {
                let mut terms = Vec::new();
                for (i, a) in fa.args.iter().enumerate() {
                    let da = self.diff(a, var)?;
                    if da.is_zero() {
                        continue;
                    }
                    let mut orders = fa.orders.clone();
                    orders[i] += 1;
                    let g = Expr::Func(Arc::new(FuncApp { name: fa.name.clone(), args: fa.args.clone(), orders }));
                    terms.push(Expr::mul(vec![g, da]));
                }
                Expr::add(terms)
            }
        })
    }

    pub fn diff_n(&self, e: &Expr, var: &str, n: u32) -> Result<Expr, DiffError> {
        let mut out = e.clone();
        for _ in 0..n {
            out = self.diff(&out, var)?;
        }
        Ok(out)
    }
}

/// Exact derivative of `e` in the symbol `var`.
pub fn differentiate(e: &Expr, var: &str) -> Result<Expr, DiffError> {
    Differentiator::new().diff(e, var)
}

/// Mixed partial derivative, applying each `(var, order)` in turn.
pub fn differentiate_multi(e: &Expr, spec: &[(&str, u32)]) -> Result<Expr, DiffError> {
    let d = Differentiator::new();
    let mut out = e.clone();
    for (v, n) in spec {
        out = d.diff_n(&out, v, *n)?;
    }
    Ok(out)
}
