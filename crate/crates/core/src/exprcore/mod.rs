//! Expression kernel: exact rational trees, parsing, printing,
//! differentiation, substitution, simplification, evaluation and
//! randomized equivalence.
//!
//! ```
//! use symred::exprcore::{parse, differentiate};
//! let e = parse("p*ln(x+C1)+C2").unwrap();
//! let d = differentiate(&e, "x").unwrap();
//! assert_eq!(d, parse("p/(x+C1)").unwrap());
//! ```

mod diff;
mod equiv;
mod eval;
mod expr;
mod parse;
mod print;
mod simplify;
mod subst;

pub use diff::{differentiate, differentiate_multi, DiffError, Differentiator};
pub use equiv::{equivalent, max_gap, scaled_gap, scaled_residual, Cmp, Constraint, Domain, EquivError};
pub use eval::{evaluate, fd_step, Env, EvalError, FuncImpl};
pub use expr::{Builtin, Expr, FuncApp};
pub use parse::{parse, ParseError};
pub use simplify::simplify;
pub use subst::{map_funcs, subs, substitute, Bindings, FuncBinding, FuncBindings, SubstError};

/// Parses a string known to be valid; panics with the parse error otherwise.
pub fn ex(s: &str) -> Expr {
    parse(s).unwrap_or_else(|e| panic!("bad expression {:?}: {}", s, e))
}
