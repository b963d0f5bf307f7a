use super::{CaseId, LieAlgebraCase, LieError};
use crate::exprcore::{differentiate, equivalent, ex, simplify, subs, Domain, Expr};
use rand::Rng;
use std::collections::BTreeMap;

/// Image of every chart coordinate under a one-parameter group, as
/// expressions in the chart symbols and the group parameter `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordMap {
    pub generator: String,
    pub images: Vec<(String, Expr)>,
}

pub const FLOW_PARAM: &str = "tau";

impl CoordMap {
    pub fn image(&self, coord: &str) -> Option<&Expr> {
        self.images.iter().find(|(c, _)| c == coord).map(|(_, e)| e)
    }

    /// The map with `tau` replaced by a value.
    pub fn at(&self, tau: &Expr) -> CoordMap {
        CoordMap {
            generator: self.generator.clone(),
            images: self
                .images
                .iter()
                .map(|(c, e)| (c.clone(), simplify(&subs(e, &[(FLOW_PARAM, tau.clone())]))))
                .collect(),
        }
    }

    /// Checks `d/dtau image = coeff(image)` and identity at `tau = 0`.
    pub fn verify<R: Rng + ?Sized>(
        &self,
        case: &LieAlgebraCase,
        domain: &Domain,
        rng: &mut R,
    ) -> Result<bool, LieError> {
        let field = case.generator(&self.generator)?;
        let pairs: Vec<(&str, Expr)> = self.images.iter().map(|(c, e)| (c.as_str(), e.clone())).collect();
        for (k, (c, img)) in self.images.iter().enumerate() {
            let lhs = differentiate(img, FLOW_PARAM).expect("flow images are abs-free");
            let rhs = subs(&field.coeffs()[k], &pairs);
            if !equivalent(&lhs, &rhs, domain, 30, 1e-10, rng)? {
                return Ok(false);
            }
            let id = subs(img, &[(FLOW_PARAM, Expr::zero())]);
            if !equivalent(&id, &Expr::sym(c), domain, 10, 1e-12, rng)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn table(id: CaseId, gen: &str) -> Option<Vec<(&'static str, &'static str)>> {
    let potential = id.is_potential();
    Some(match (gen, potential) {
        ("X1", _) => vec![("t", "t + tau")],
        ("X2", _) => vec![("x", "x + tau")],
        ("X3", false) => vec![("t", "t*exp(tau)"), ("x", "x*exp(tau)"), ("u1", "u1*exp(-tau)")],
        ("X3", true) => vec![("v0", "v0 + tau")],
        ("X4", true) => vec![("v1", "v1 + tau")],
        ("X4", false) => match id {
            CaseId::I => vec![("x", "x*exp(tau)"), ("u0", "u0 + 2*p*tau"), ("u1", "u1*exp(2*s*tau)")],
            CaseId::II => {
                vec![("x", "x*exp(tau)"), ("u0", "(u0 + q)*exp(2*p*tau) - q"), ("u1", "u1*exp(2*s*tau)")]
            }
            CaseId::III => vec![("x", "x*exp(tau)"), ("u0", "(u0 + q)*exp(-3/2*tau) - q"), ("u1", "u1*exp(-3/2*tau)")],
            _ => return None,
        },
        ("X5", false) if id == CaseId::III => {
            vec![("x", "x/(1 - tau*x)"), ("u0", "(u0 + q)*(1 - tau*x)^3 - q"), ("u1", "u1*(1 - tau*x)^3")]
        }
        ("X5", true) => vec![("t", "t*exp(tau)"), ("x", "x*exp(tau)"), ("u1", "u1*exp(-tau)"), ("v1", "v1*exp(-tau)")],
        ("X6", true) => {
            if id == CaseId::IV {
                vec![
                    ("x", "x*exp(tau)"),
                    ("u0", "u0 + 2*p*tau"),
                    ("v0", "v0*exp(tau)"),
                    ("u1", "u1*exp(2*s*tau)"),
                    ("v1", "v1*exp((2*s + 1)*tau)"),
                ]
            } else {
                vec![
                    ("x", "x*exp(tau)"),
                    ("u0", "(u0 + q)*exp(2*p*tau) - q"),
                    ("v0", "v0*exp((2*p + 1)*tau)"),
                    ("u1", "u1*exp(2*s*tau)"),
                    ("v1", "v1*exp((2*s + 1)*tau)"),
                ]
            }
        }
        _ => return None,
    })
}

/// Closed-form one-parameter group of a basis generator.
pub fn flow(case: &LieAlgebraCase, gen: &str) -> Result<CoordMap, LieError> {
    case.generator(gen)?;
    let t = table(case.id, gen).ok_or_else(|| LieError::UnknownGenerator(gen.to_string()))?;
    let images = case
        .chart
        .iter()
        .map(|c| {
            let e = t.iter().find(|(k, _)| k == c).map(|(_, s)| ex(s)).unwrap_or_else(|| Expr::sym(c));
            (c.clone(), e)
        })
        .collect();
    Ok(CoordMap { generator: gen.to_string(), images })
}

/// Transforms a solution by the group element at `tau`.
///
/// All flows here are projectable (the t, x images involve t, x only), so
/// the new fields at (t, x) are the images of the old fields evaluated at
/// the preimage point, obtained from the base map at `-tau`.
pub fn push_forward(
    case: &LieAlgebraCase,
    gen: &str,
    tau: f64,
    fields: &BTreeMap<String, Expr>,
) -> Result<BTreeMap<String, Expr>, LieError> {
    let m = flow(case, gen)?;
    let tau_e = rational_of(tau);
    let fwd = m.at(&tau_e);
    let back = m.at(&-tau_e);
    let t0 = back.image("t").cloned().unwrap_or_else(|| Expr::sym("t"));
    let x0 = back.image("x").cloned().unwrap_or_else(|| Expr::sym("x"));
    let base = [("t", t0), ("x", x0)];
    let mut pre: Vec<(&str, Expr)> = base.to_vec();
    for (name, e) in fields {
        pre.push((name.as_str(), subs(e, &base)));
    }
    let mut out = BTreeMap::new();
    for name in fields.keys() {
        let img = fwd.image(name).ok_or_else(|| LieError::UnknownGenerator(name.clone()))?;
        out.insert(name.clone(), simplify(&subs(img, &pre)));
    }
    Ok(out)
}

// exact rational for short decimals such as 0.3
fn rational_of(v: f64) -> Expr {
    let s = format!("{}", v);
    crate::exprcore::parse(&s).unwrap_or_else(|_| Expr::rational((v * 1e9).round() as i64, 1_000_000_000))
}
