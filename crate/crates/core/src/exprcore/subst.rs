use super::diff::{DiffError, Differentiator};
use super::expr::{Expr, FuncApp};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubstError {
    #[error("function `{name}` bound with {expected} formal arguments but applied to {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// Lambda-style binding for an unknown function: formal argument names and a body.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncBinding {
    pub formals: Vec<String>,
    pub body: Expr,
}

impl FuncBinding {
    pub fn new(formals: &[&str], body: Expr) -> Self {
        FuncBinding { formals: formals.iter().map(|s| s.to_string()).collect(), body }
    }
}

pub type Bindings = BTreeMap<String, Expr>;
pub type FuncBindings = BTreeMap<String, FuncBinding>;

/// Simultaneous replacement of symbols and unknown functions.
///
/// A bound function applied with derivative orders is replaced by the
/// corresponding derivative of its body, with the formal arguments then
/// replaced by the (already substituted) actual arguments.
pub fn substitute(e: &Expr, bindings: &Bindings, fbindings: &FuncBindings) -> Result<Expr, SubstError> {
    match e {
        Expr::Num(_) => Ok(e.clone()),
        Expr::Sym(s) => Ok(bindings.get(&**s).cloned().unwrap_or_else(|| e.clone())),
        Expr::Func(fa) => {
            let mut args = Vec::with_capacity(fa.args.len());
            for a in &fa.args {
                args.push(substitute(a, bindings, fbindings)?);
            }
            match fbindings.get(&*fa.name) {
                None => Ok(Expr::Func(std::sync::Arc::new(FuncApp {
                    name: fa.name.clone(),
                    args,
                    orders: fa.orders.clone(),
                }))),
                Some(fb) => {
                    if fb.formals.len() != args.len() {
                        return Err(SubstError::Arity {
                            name: fa.name.to_string(),
                            expected: fb.formals.len(),
                            got: args.len(),
                        });
                    }
                    let d = Differentiator::new();
                    let mut body = fb.body.clone();
                    for (v, n) in fb.formals.iter().zip(&fa.orders) {
                        body = d.diff_n(&body, v, *n)?;
                    }
                    let map: Bindings = fb.formals.iter().cloned().zip(args).collect();
                    substitute(&body, &map, &FuncBindings::new())
                }
            }
        }
        _ => {
            let mut err = None;
            let out = e.map_children(|c| match substitute(c, bindings, fbindings) {
                Ok(v) => v,
                Err(x) => {
                    err.get_or_insert(x);
                    Expr::zero()
                }
            });
            match err {
                Some(x) => Err(x),
                None => Ok(out),
            }
        }
    }
}

/// Symbol-only substitution, which cannot fail.
pub fn subs(e: &Expr, pairs: &[(&str, Expr)]) -> Expr {
    let b: Bindings = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    substitute(e, &b, &FuncBindings::new()).expect("symbol substitution is infallible")
}

/// Replaces every unknown-function application for which `f` returns `Some`.
pub fn map_funcs(e: &Expr, f: &impl Fn(&FuncApp) -> Option<Expr>) -> Expr {
    match e {
        Expr::Func(fa) => {
            if let Some(r) = f(fa) {
                return r;
            }
            e.map_children(|c| map_funcs(c, f))
        }
        _ => e.map_children(|c| map_funcs(c, f)),
    }
}
