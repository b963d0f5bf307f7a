//! Vector fields, brackets, structure constants, adjoint action, flows and
//! one-dimensional subalgebra normal forms for the five symmetry algebras.

mod adjoint;
mod classify;
mod flow;
mod orbit;

pub use adjoint::{ad_matrix, bch_conjugate, expm, AlgebraElement, NumericAlgebra};
pub use classify::{
    golden_list, normalize, parse_element, verify_conjugator, Classification, ConjStep, GoldenEntry, Slot, Template,
};
pub use flow::{flow, push_forward, CoordMap};
pub use orbit::{orbit_distance, OrbitSearch};

use crate::exprcore::{differentiate, equivalent, ex, simplify, subs, Domain, EquivError, EvalError, Expr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("chart mismatch: {0:?} vs {1:?}")]
    ChartMismatch(Vec<String>, Vec<String>),
    #[error("basis not closed: [{0},{1}] leaves residual {2}")]
    NotClosed(String, String, String),
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad element: {0}")]
    BadElement(String),
    #[error("zero element")]
    ZeroElement,
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// First-order differential operator on a named chart.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<[String]>,
    coeffs: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &[String], coeffs: Vec<Expr>) -> Self {
        assert_eq!(chart.len(), coeffs.len(), "one coefficient per coordinate");
        VectorField { chart: chart.to_vec().into(), coeffs }
    }

    /// Builds a field from `(coordinate, coefficient)` pairs; unlisted coordinates get 0.
    pub fn from_terms(chart: &[String], terms: &[(&str, Expr)]) -> Self {
        let mut coeffs = vec![Expr::zero(); chart.len()];
        for (c, e) in terms {
            let i = chart.iter().position(|k| k == c).unwrap_or_else(|| panic!("{} not in chart", c));
            coeffs[i] = e.clone();
        }
        VectorField::new(chart, coeffs)
    }

    pub fn zero(chart: &[String]) -> Self {
        VectorField::new(chart, vec![Expr::zero(); chart.len()])
    }

    pub fn chart(&self) -> &[String] {
        &self.chart
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, coord: &str) -> Option<&Expr> {
        self.chart.iter().position(|c| c == coord).map(|i| &self.coeffs[i])
    }

    /// The field acting as a derivation on a scalar expression.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (c, k) in self.chart.iter().zip(&self.coeffs) {
            if k.is_zero() || !f.contains_sym(c) {
                continue;
            }
            let d = differentiate(f, c).expect("chart derivatives of abs-free expressions");
            terms.push(k * &d);
        }
        Expr::add(terms)
    }

    pub fn scale(&self, c: &Expr) -> VectorField {
        VectorField { chart: self.chart.clone(), coeffs: self.coeffs.iter().map(|k| simplify(&(c * k))).collect() }
    }

    pub fn plus(&self, other: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| simplify(&(a + b))).collect(),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, k) in self.chart.iter().zip(&self.coeffs) {
            if k.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k.is_one() {
                write!(f, "d_{}", c)?;
            } else {
                write!(f, "({})*d_{}", k, c)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Commutator `[V, W]` with components `V(W_k) - W(V_k)`.
pub fn bracket(v: &VectorField, w: &VectorField) -> Result<VectorField, LieError> {
    if v.chart != w.chart {
        return Err(LieError::ChartMismatch(v.chart.to_vec(), w.chart.to_vec()));
    }
    let coeffs = v.coeffs.iter().zip(&w.coeffs).map(|(vk, wk)| simplify(&(v.apply(wk) - w.apply(vk)))).collect();
    Ok(VectorField { chart: v.chart.clone(), coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseId {
    I,
    II,
    III,
    IV,
    V,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V];

    pub fn is_potential(self) -> bool {
        matches!(self, CaseId::IV | CaseId::V)
    }

    pub fn chart(self) -> Vec<String> {
        let c: &[&str] =
            if self.is_potential() { &["t", "x", "u0", "v0", "u1", "v1"] } else { &["t", "x", "u0", "u1"] };
        c.iter().map(|s| s.to_string()).collect()
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseId::I => "I",
            CaseId::II => "II",
            CaseId::III => "III",
            CaseId::IV => "IV",
            CaseId::V => "V",
        };
        f.write_str(s)
    }
}

impl FromStr for CaseId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "I" => CaseId::I,
            "II" => CaseId::II,
            "III" => CaseId::III,
            "IV" => CaseId::IV,
            "V" => CaseId::V,
            _ => return Err(format!("unknown case `{}` (expected I, II, III, IV or V)", s)),
        })
    }
}

/// Numeric values for the algebra parameters `p`, `q`, `s`.
pub type Params = BTreeMap<String, f64>;

/// `p = 1`, `q = 0`, `s = 1/2`.
pub fn default_params() -> Params {
    [("p", 1.0), ("q", 0.0), ("s", 0.5)].iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

// generator coefficient strings per case, keyed by coordinate
fn generator_table(id: CaseId) -> Vec<(&'static str, Vec<(&'static str, &'static str)>)> {
    let x3 = ("X3", vec![("t", "t"), ("x", "x"), ("u1", "-u1")]);
    let common = vec![("X1", vec![("t", "1")]), ("X2", vec![("x", "1")])];
    let mut out = common;
    match id {
        CaseId::I => {
            out.push(x3);
            out.push(("X4", vec![("x", "x"), ("u0", "2*p"), ("u1", "2*s*u1")]));
        }
        CaseId::II => {
            out.push(x3);
            out.push(("X4", vec![("x", "x"), ("u0", "2*p*(u0+q)"), ("u1", "2*s*u1")]));
        }
        CaseId::III => {
            out.push(x3);
            out.push(("X4", vec![("x", "x"), ("u0", "-3/2*(u0+q)"), ("u1", "-3/2*u1")]));
            out.push(("X5", vec![("x", "x^2"), ("u0", "-3*x*(u0+q)"), ("u1", "-3*x*u1")]));
        }
        CaseId::IV | CaseId::V => {
            out.push(("X3", vec![("v0", "1")]));
            out.push(("X4", vec![("v1", "1")]));
            out.push(("X5", vec![("t", "t"), ("x", "x"), ("u1", "-u1"), ("v1", "-v1")]));
            if id == CaseId::IV {
                out.push(("X6", vec![("x", "x"), ("u0", "2*p"), ("v0", "v0"), ("u1", "2*s*u1"), ("v1", "(2*s+1)*v1")]));
            } else {
                out.push((
                    "X6",
                    vec![
                        ("x", "x"),
                        ("u0", "2*p*(u0+q)"),
                        ("v0", "(2*p+1)*v0"),
                        ("u1", "2*s*u1"),
                        ("v1", "(2*s+1)*v1"),
                    ],
                ));
            }
        }
    }
    out
}

/// A symmetry algebra with its basis and symbolic structure constants.
#[derive(Debug, Clone)]
pub struct LieAlgebraCase {
    pub id: CaseId,
    pub chart: Vec<String>,
    pub names: Vec<String>,
    pub basis: Vec<VectorField>,
    /// `c[i][j][k]` with `[X_i, X_j] = sum_k c[i][j][k] X_k`.
    pub constants: Vec<Vec<Vec<Expr>>>,
}

impl LieAlgebraCase {
    pub fn new(id: CaseId) -> Result<Self, LieError> {
        let chart = id.chart();
        let mut names = Vec::new();
        let mut basis = Vec::new();
        for (name, terms) in generator_table(id) {
            let t: Vec<(&str, Expr)> = terms.iter().map(|(c, s)| (*c, ex(s))).collect();
            names.push(name.to_string());
            basis.push(VectorField::from_terms(&chart, &t));
        }
        let constants = structure_constants(&names, &basis)?;
        Ok(LieAlgebraCase { id, chart, names, basis, constants })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn generator(&self, name: &str) -> Result<&VectorField, LieError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.basis[i])
            .ok_or_else(|| LieError::UnknownGenerator(name.to_string()))
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Structure constants with parameters bound.
    pub fn numeric_constants(&self, params: &Params) -> Result<Vec<Vec<Vec<f64>>>, LieError> {
        let env = params_env(params);
        let mut out = vec![vec![vec![0.0; self.dim()]; self.dim()]; self.dim()];
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                for k in 0..self.dim() {
                    let c = &self.constants[i][j][k];
                    if c.is_zero() {
                        continue;
                    }
                    out[i][j][k] = crate::exprcore::evaluate(c, &env).map_err(|e| match e {
                        EvalError::Unbound(n) => LieError::UnboundParam(n),
                        other => LieError::Eval(other),
                    })?;
                }
            }
        }
        Ok(out)
    }

    /// Field `sum_i c_i X_i` for symbolic coefficients.
    pub fn combine(&self, coeffs: &[Expr]) -> VectorField {
        let mut acc = VectorField::zero(&self.chart);
        for (c, x) in coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = acc.plus(&x.scale(c));
            }
        }
        acc
    }

    /// Nonzero brackets `[Xi,Xj] = ...` for `i < j`, as display strings.
    pub fn bracket_lines(&self, all: bool) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                let s = self.format_combination(&self.constants[i][j]);
                if all || s != "0" {
                    out.push(format!("[{},{}]={}", self.names[i], self.names[j], s));
                }
            }
        }
        out
    }

    pub fn format_combination(&self, c: &[Expr]) -> String {
        let mut s = String::new();
        for (k, ck) in c.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            let name = &self.names[k];
            let term = if ck.is_one() {
                name.clone()
            } else if *ck == Expr::int(-1) {
                format!("-{}", name)
            } else if ck.as_num().is_some() {
                format!("{}{}", ck, name)
            } else {
                format!("({}){}", ck, name)
            };
            if !s.is_empty() && !term.starts_with('-') {
                s.push('+');
            }
            s.push_str(&term);
        }
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    }
}

pub(crate) fn params_env(params: &Params) -> crate::exprcore::Env {
    let mut env = crate::exprcore::Env::new();
    for (k, v) in params {
        env.set(k, *v);
    }
    env
}

/// Sampling region for the algebra parameters used in symbolic pivot tests.
pub fn param_domain() -> Domain {
    Domain::new().var("p", 0.5, 2.0).var("q", -1.0, 1.0).var("s", -2.0, 1.0)
}

fn chart_domain(chart: &[String]) -> Domain {
    let mut d = param_domain();
    for c in chart {
        d = d.var(c, 0.2, 2.0);
    }
    d
}

const SAMPLE_POINTS: [[(i64, i64); 6]; 3] = [
    [(1, 2), (2, 3), (3, 4), (5, 4), (7, 5), (2, 7)],
    [(3, 2), (5, 3), (1, 3), (2, 5), (9, 7), (4, 3)],
    [(7, 4), (1, 5), (8, 5), (3, 7), (5, 6), (11, 9)],
];

/// Expresses every bracket of the basis in the basis itself.
///
/// The coefficient identities are evaluated at a few rational chart points,
/// leaving a linear system over expressions in the parameters, solved by
/// Gaussian elimination with randomized nonzero tests on pivots. The
/// projection residual is then checked over the whole chart.
pub fn structure_constants(names: &[String], basis: &[VectorField]) -> Result<Vec<Vec<Vec<Expr>>>, LieError> {
    let n = basis.len();
    let mut out = vec![vec![vec![Expr::zero(); n]; n]; n];
    if n == 0 {
        return Ok(out);
    }
    let chart = basis[0].chart().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    // equations: one row per (sample point, coordinate)
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    let mut point_subs: Vec<Vec<(String, Expr)>> = Vec::new();
    for pt in SAMPLE_POINTS.iter() {
        let s: Vec<(String, Expr)> =
            chart.iter().zip(pt.iter()).map(|(c, (a, b))| (c.clone(), Expr::rational(*a, *b))).collect();
        point_subs.push(s);
    }
    let at = |e: &Expr, s: &[(String, Expr)]| -> Expr {
        let pairs: Vec<(&str, Expr)> = s.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        simplify(&subs(e, &pairs))
    };
    for s in &point_subs {
        for k in 0..chart.len() {
            rows.push(basis.iter().map(|x| at(&x.coeffs()[k], s)).collect());
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let w = bracket(&basis[i], &basis[j])?;
            let mut rhs = Vec::new();
            for s in &point_subs {
                for k in 0..chart.len() {
                    rhs.push(at(&w.coeffs()[k], s));
                }
            }
            let sol = solve_linear(rows.clone(), rhs, &mut rng)?;
            let sol = match sol {
                Some(v) => v,
                None => return Err(LieError::NotClosed(names[i].clone(), names[j].clone(), w.to_string())),
            };
            // projection residual over the full chart
            let mut proj = VectorField::zero(&chart);
            for (c, x) in sol.iter().zip(basis) {
                proj = proj.plus(&x.scale(c));
            }
            let dom = chart_domain(&chart);
            for k in 0..chart.len() {
                if !equivalent(&w.coeffs()[k], &proj.coeffs()[k], &dom, 50, 1e-10, &mut rng)? {
                    let r = simplify(&(&w.coeffs()[k] - &proj.coeffs()[k]));
                    return Err(LieError::NotClosed(names[i].clone(), names[j].clone(), r.to_string()));
                }
            }
            for k in 0..n {
                out[i][j][k] = sol[k].clone();
                out[j][i][k] = simplify(&-&sol[k]);
            }
        }
    }
    Ok(out)
}

fn nonzero(e: &Expr, rng: &mut ChaCha8Rng) -> Result<bool, LieError> {
    if e.is_zero() {
        return Ok(false);
    }
    if e.as_num().is_some() {
        return Ok(true);
    }
    Ok(!equivalent(e, &Expr::zero(), &param_domain(), 12, 1e-12, rng)?)
}

// Gaussian elimination over parameter expressions; None when inconsistent
fn solve_linear(mut a: Vec<Vec<Expr>>, mut b: Vec<Expr>, rng: &mut ChaCha8Rng) -> Result<Option<Vec<Expr>>, LieError> {
    let m = a.len();
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let mut found = None;
        for r in row..m {
            if nonzero(&a[r][col], rng)? {
                found = Some(r);
                break;
            }
        }
        let Some(p) = found else { continue };
        a.swap(row, p);
        b.swap(row, p);
        let piv = a[row][col].clone();
        for r in 0..m {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = simplify(&(&a[r][col] / &piv));
            for c in col..n {
                let v = simplify(&(&a[r][c] - &(&f * &a[row][c])));
                a[r][c] = v;
            }
            b[r] = simplify(&(&b[r] - &(&f * &b[row])));
        }
        pivots.push((row, col));
        row += 1;
        if row == m {
            break;
        }
    }
    for r in row..m {
        if nonzero(&b[r], rng)? {
            return Ok(None);
        }
    }
    let mut x = vec![Expr::zero(); n];
    for (r, c) in pivots {
        x[c] = simplify(&(&b[r] / &a[r][c]));
    }
    Ok(Some(x))
}
