use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Elementary functions known to the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Ln,
    Exp,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Ln => "ln",
            Builtin::Exp => "exp",
            Builtin::Sqrt => "sqrt",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Builtin> {
        Some(match s {
            "ln" => Builtin::Ln,
            "exp" => Builtin::Exp,
            "sqrt" => Builtin::Sqrt,
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "abs" => Builtin::Abs,
            _ => return None,
        })
    }
}

/// Application of an unknown function, possibly differentiated.
///
/// `orders[i]` is the number of derivatives taken in the i-th argument slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncApp {
    pub name: Arc<str>,
    pub args: Vec<Expr>,
    pub orders: Vec<u32>,
}

impl FuncApp {
    pub fn total_order(&self) -> u32 {
        self.orders.iter().sum()
    }
}

/// Immutable expression tree.
///
/// Values are only built through the smart constructors, which keep sums and
/// products flat, sorted and with like terms collected. The derived ordering
/// (variant tag, then payload) is the canonical term order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(BigRational),
    Sym(Arc<str>),
    Add(Arc<[Expr]>),
    Mul(Arc<[Expr]>),
    Pow(Arc<(Expr, Expr)>),
    Call(Builtin, Arc<Expr>),
    Func(Arc<FuncApp>),
}

// exponents beyond this stay symbolic instead of being expanded
const MAX_EXACT_POW: u32 = 64;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(BigRational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        assert!(d != 0, "zero denominator");
        Expr::Num(rat(n, d))
    }

    pub fn number(r: BigRational) -> Expr {
        Expr::Num(r)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Arc::from(name))
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Expr::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.as_num().and_then(|r| r.to_f64())
    }

    /// Sum with flattening, constant folding and collection of like terms.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut constant = BigRational::zero();
        let mut collected: BTreeMap<Expr, BigRational> = BTreeMap::new();
        let mut stack = terms;
        while let Some(t) = stack.pop() {
            match t {
                Expr::Add(inner) => stack.extend(inner.iter().cloned()),
                Expr::Num(r) => constant += r,
                other => {
                    let (c, rest) = other.split_coeff();
                    *collected.entry(rest).or_insert_with(BigRational::zero) += c;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::new();
        if !constant.is_zero() {
            out.push(Expr::Num(constant));
        }
        for (rest, c) in collected {
            if c.is_zero() {
                continue;
            }
            out.push(Expr::scale(c, rest));
        }
        out.sort();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out.into()),
        }
    }

    // coefficient times an already-normal non-numeric term
    fn scale(c: BigRational, rest: Expr) -> Expr {
        if c.is_one() {
            return rest;
        }
        match rest {
            Expr::Mul(fs) => {
                let mut v = Vec::with_capacity(fs.len() + 1);
                v.push(Expr::Num(c));
                v.extend(fs.iter().cloned());
                Expr::Mul(v.into())
            }
            other => Expr::Mul(vec![Expr::Num(c), other].into()),
        }
    }

    /// Splits a term into its rational coefficient and the remaining product.
    pub fn split_coeff(&self) -> (BigRational, Expr) {
        match self {
            Expr::Num(r) => (r.clone(), Expr::one()),
            Expr::Mul(fs) => match &fs[0] {
                Expr::Num(r) => {
                    let rest: Vec<Expr> = fs[1..].to_vec();
                    let rest = if rest.len() == 1 { rest.into_iter().next().unwrap() } else { Expr::Mul(rest.into()) };
                    (r.clone(), rest)
                }
                _ => (BigRational::one(), self.clone()),
            },
            _ => (BigRational::one(), self.clone()),
        }
    }

    /// Product with flattening, constant folding and merging of equal bases.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut coeff = BigRational::one();
        let mut bases: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        let mut stack = factors;
        while let Some(f) = stack.pop() {
            match f {
                Expr::Mul(inner) => stack.extend(inner.iter().cloned()),
                Expr::Num(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= r;
                }
                Expr::Pow(be) => {
                    let (b, e) = (&be.0, &be.1);
                    bases.entry(b.clone()).or_default().push(e.clone());
                }
                other => bases.entry(other).or_default().push(Expr::one()),
            }
        }
        let mut out: Vec<Expr> = Vec::new();
        for (b, es) in bases {
            let e = Expr::add(es);
            match Expr::pow(b, e) {
                Expr::Num(r) => coeff *= r,
                Expr::Mul(inner) => {
                    // a merged power can split again, e.g. (x*y)^2
                    for f in inner.iter() {
                        match f {
                            Expr::Num(r) => coeff *= r.clone(),
                            g => out.push(g.clone()),
                        }
                    }
                }
                p => out.push(p),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        // splitting may have produced repeated bases; fold again if so
        let mut seen = BTreeSet::new();
        let repeated = out.iter().any(|f| !seen.insert(f.base_exp().0));
        if repeated {
            let mut v = out;
            v.push(Expr::Num(coeff));
            return Expr::mul(v);
        }
        out.sort();
        if out.is_empty() {
            return Expr::Num(coeff);
        }
        if coeff.is_one() && out.len() == 1 {
            return out.pop().unwrap();
        }
        if !coeff.is_one() {
            out.insert(0, Expr::Num(coeff));
        }
        Expr::Mul(out.into())
    }

    /// Base and exponent of a factor (`x` is `x^1`).
    pub fn base_exp(&self) -> (Expr, Expr) {
        match self {
            Expr::Pow(be) => (be.0.clone(), be.1.clone()),
            other => (other.clone(), Expr::one()),
        }
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        if base.is_one() {
            return Expr::one();
        }
        if let Some(e) = exp.as_num() {
            if base.is_zero() && e.is_positive() {
                return Expr::zero();
            }
            if let Some(b) = base.as_num() {
                if let Some(v) = rational_pow(b, e) {
                    return Expr::Num(v);
                }
            }
            if e.is_integer() {
                match &base {
                    Expr::Pow(be) => return Expr::pow(be.0.clone(), Expr::mul(vec![be.1.clone(), exp])),
                    Expr::Mul(fs) => {
                        let v = fs.iter().map(|f| Expr::pow(f.clone(), exp.clone())).collect();
                        return Expr::mul(v);
                    }
                    _ => {}
                }
            }
        }
        if let Expr::Call(Builtin::Exp, a) = &base {
            // (e^a)^b = e^(ab) holds for real a
            return Expr::call(Builtin::Exp, Expr::mul(vec![(**a).clone(), exp]));
        }
        Expr::Pow(Arc::new((base, exp)))
    }

    pub fn call(f: Builtin, arg: Expr) -> Expr {
        match (f, &arg) {
            (Builtin::Sqrt, _) => Expr::pow(arg, Expr::rational(1, 2)),
            (Builtin::Exp, a) if a.is_zero() => Expr::one(),
            (Builtin::Ln, a) if a.is_one() => Expr::zero(),
            (Builtin::Ln, Expr::Call(Builtin::Exp, inner)) => (**inner).clone(),
            (Builtin::Exp, Expr::Call(Builtin::Ln, inner)) => (**inner).clone(),
            (Builtin::Sin, a) if a.is_zero() => Expr::zero(),
            (Builtin::Cos, a) if a.is_zero() => Expr::one(),
            (Builtin::Abs, Expr::Num(r)) => Expr::Num(r.abs()),
            _ => Expr::Call(f, Arc::new(arg)),
        }
    }

    pub fn func(name: &str, args: Vec<Expr>, orders: Vec<u32>) -> Expr {
        assert_eq!(args.len(), orders.len(), "arity/order mismatch");
        Expr::Func(Arc::new(FuncApp { name: Arc::from(name), args, orders }))
    }

    /// `F(arg)` with no derivatives.
    pub fn apply(name: &str, args: Vec<Expr>) -> Expr {
        let n = args.len();
        Expr::func(name, args, vec![0; n])
    }

    pub fn ln(self) -> Expr {
        Expr::call(Builtin::Ln, self)
    }
    pub fn exp(self) -> Expr {
        Expr::call(Builtin::Exp, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::call(Builtin::Sqrt, self)
    }
    pub fn sin(self) -> Expr {
        Expr::call(Builtin::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::call(Builtin::Cos, self)
    }
    pub fn abs(self) -> Expr {
        Expr::call(Builtin::Abs, self)
    }
    pub fn powi(self, n: i64) -> Expr {
        Expr::pow(self, Expr::int(n))
    }
    pub fn powr(self, n: i64, d: i64) -> Expr {
        Expr::pow(self, Expr::rational(n, d))
    }
    pub fn pow_expr(self, e: Expr) -> Expr {
        Expr::pow(self, e)
    }

    /// Direct children, in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Num(_) | Expr::Sym(_) => vec![],
            Expr::Add(v) | Expr::Mul(v) => v.iter().collect(),
            Expr::Pow(be) => vec![&be.0, &be.1],
            Expr::Call(_, a) => vec![&**a],
            Expr::Func(fa) => fa.args.iter().collect(),
        }
    }

    /// Rebuilds a node from transformed children through the smart constructors.
    pub fn map_children(&self, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Num(_) | Expr::Sym(_) => self.clone(),
            Expr::Add(v) => Expr::add(v.iter().map(&mut f).collect()),
            Expr::Mul(v) => Expr::mul(v.iter().map(&mut f).collect()),
            Expr::Pow(be) => Expr::pow(f(&be.0), f(&be.1)),
            Expr::Call(b, a) => Expr::call(*b, f(a)),
            Expr::Func(fa) => Expr::Func(Arc::new(FuncApp {
                name: fa.name.clone(),
                args: fa.args.iter().map(&mut f).collect(),
                orders: fa.orders.clone(),
            })),
        }
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        if let Expr::Sym(s) = self {
            out.insert(s.to_string());
        }
        for c in self.children() {
            c.collect_symbols(out);
        }
    }

    /// Names of the unknown functions applied anywhere in the tree.
    pub fn functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Func(fa) = e {
                out.insert(fa.name.to_string());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn contains_sym(&self, name: &str) -> bool {
        match self {
            Expr::Sym(s) => &**s == name,
            _ => self.children().iter().any(|c| c.contains_sym(name)),
        }
    }

    pub fn contains_func(&self, name: &str) -> bool {
        match self {
            Expr::Func(fa) if &*fa.name == name => true,
            _ => self.children().iter().any(|c| c.contains_func(name)),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

/// Exact `b^e` when the result is rational.
fn rational_pow(b: &BigRational, e: &BigRational) -> Option<BigRational> {
    let n = e.numer().to_i64()?;
    let d = e.denom().to_u32()?;
    if n.unsigned_abs() > MAX_EXACT_POW as u64 {
        return None;
    }
    if b.is_zero() {
        return if n > 0 { Some(BigRational::zero()) } else { None };
    }
    let root = if d == 1 {
        b.clone()
    } else {
        if b.is_negative() && d % 2 == 0 {
            return None;
        }
        let neg = b.is_negative();
        let rn = exact_root(&b.numer().abs(), d)?;
        let rd = exact_root(b.denom(), d)?;
        let r = BigRational::new(rn, rd);
        if neg {
            -r
        } else {
            r
        }
    };
    let mut out = num::pow::pow(root, n.unsigned_abs() as usize);
    if n < 0 {
        out = out.recip();
    }
    Some(out)
}

fn exact_root(n: &BigInt, d: u32) -> Option<BigInt> {
    let r = n.nth_root(d);
    if num::pow::pow(r.clone(), d as usize) == *n {
        Some(r)
    } else {
        None
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add(vec![a, Expr::mul(vec![Expr::int(-1), b])]));
binop!(Mul, mul, |a, b| Expr::mul(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul(vec![a, Expr::pow(b, Expr::int(-1))]));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::to_string(self))
    }
}
