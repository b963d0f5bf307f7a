use super::adjoint::{expm, AlgebraElement, NumericAlgebra};
use super::{CaseId, LieError};
use crate::exprcore::{differentiate, evaluate, parse, Env, Expr};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::fmt;

/// How a template slot fixes its coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum SlotKind {
    Lit(f64),
    Eps,
    Param(char),
}

/// One term of a representative: a coefficient kind times a fixed combination
/// of basis generators (a single generator except in case III).
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub kind: SlotKind,
    pub combo: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub case: CaseId,
    pub name: Option<String>,
    pub label: String,
    pub slots: Vec<Slot>,
    /// Parameters that the list requires to be nonzero.
    pub nonzero: Vec<char>,
}

impl Template {
    fn parse(case: CaseId, name: Option<&str>, label: &str, nonzero: &[char]) -> Template {
        let body: Vec<char> = label.trim_start_matches('{').trim_end_matches('}').chars().collect();
        let mut slots = Vec::new();
        let mut i = 0;
        while i < body.len() {
            let mut sign = 1.0;
            if body[i] == '+' || body[i] == '-' {
                if body[i] == '-' {
                    sign = -1.0;
                }
                i += 1;
            }
            let kind = match body[i] {
                'ε' => {
                    i += 1;
                    SlotKind::Eps
                }
                c @ ('a' | 'b' | 'c' | 'd') => {
                    i += 1;
                    SlotKind::Param(c)
                }
                _ => SlotKind::Lit(sign),
            };
            let mut combo = Vec::new();
            if body[i] == '(' {
                i += 1;
                let mut s = 1.0;
                while body[i] != ')' {
                    match body[i] {
                        '+' => s = 1.0,
                        '-' => s = -1.0,
                        'X' => {
                            let (k, n) = read_index(&body, i + 1);
                            combo.push((k, s));
                            i = n - 1;
                        }
                        _ => panic!("bad template {}", label),
                    }
                    i += 1;
                }
                i += 1;
            } else {
                assert_eq!(body[i], 'X', "bad template {}", label);
                let (k, n) = read_index(&body, i + 1);
                combo.push((k, 1.0));
                i = n;
            }
            // a minus sign in front of a symbolic coefficient belongs to the combination
            if sign < 0.0 && !matches!(kind, SlotKind::Lit(_)) {
                for c in combo.iter_mut() {
                    c.1 = -c.1;
                }
            }
            slots.push(Slot { kind, combo });
        }
        Template { case, name: name.map(|s| s.to_string()), label: label.to_string(), slots, nonzero: nonzero.to_vec() }
    }

    pub fn params(&self) -> Vec<char> {
        let mut out = Vec::new();
        for s in &self.slots {
            match s.kind {
                SlotKind::Param(c) => out.push(c),
                SlotKind::Eps => out.push('ε'),
                SlotKind::Lit(_) => {}
            }
        }
        out.sort_by_key(|c| if *c == 'ε' { 'z' } else { *c });
        out
    }

    /// Coefficient vector for the given parameter values (ε included).
    pub fn instantiate(&self, dim: usize, values: &[(char, f64)]) -> Vec<f64> {
        let get = |c: char| values.iter().find(|(k, _)| *k == c).map(|(_, v)| *v).unwrap_or(0.0);
        let mut v = vec![0.0; dim];
        for s in &self.slots {
            let k = match s.kind {
                SlotKind::Lit(x) => x,
                SlotKind::Eps => get('ε'),
                SlotKind::Param(c) => get(c),
            };
            for (g, w) in &s.combo {
                v[*g] += k * w;
            }
        }
        v
    }

    fn support(&self, strict: bool) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .slots
            .iter()
            .filter(|s| strict || !matches!(s.kind, SlotKind::Param(_)))
            .flat_map(|s| s.combo.iter().map(|(g, _)| *g))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

fn read_index(body: &[char], mut i: usize) -> (usize, usize) {
    let mut n = 0usize;
    while i < body.len() && body[i].is_ascii_digit() {
        n = n * 10 + body[i].to_digit(10).unwrap() as usize;
        i += 1;
    }
    (n - 1, i)
}

/// A listed class with the parameter ranges used when drawing representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenEntry {
    pub template: Template,
}

impl GoldenEntry {
    /// Random admissible parameters: symbolic ones in [-2, 2] away from 0, ε = ±1.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(char, f64)> {
        self.template
            .params()
            .into_iter()
            .map(|c| {
                if c == 'ε' {
                    (c, if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                } else {
                    let m: f64 = rng.gen_range(0.1..2.0);
                    (c, if rng.gen_bool(0.5) { m } else { -m })
                }
            })
            .collect()
    }

    pub fn element(&self, values: &[(char, f64)]) -> AlgebraElement {
        let dim = if self.template.case.is_potential() {
            6
        } else if self.template.case == CaseId::III {
            5
        } else {
            4
        };
        AlgebraElement::new(self.template.case, self.template.instantiate(dim, values))
    }
}

const SEMIDIRECT_I: [&str; 7] = ["{X1}", "{X4}", "{X2}", "{X3+aX4}", "{X4-X3+εX2}", "{X1+εX2}", "{X1+εX4}"];

const LIST_III: [&str; 11] = [
    "{X3-X4}",
    "{X1}",
    "{X2}",
    "{X4}",
    "{X2-X5}",
    "{X3-X4+εX2}",
    "{X3+aX4}",
    "{X3-X4+a(X2-X5)}",
    "{X1+εX2}",
    "{X1+εX4}",
    "{X1+ε(X2-X5)}",
];

const LIST_POT: [&str; 63] = [
    "{X1}",
    "{X2}",
    "{X1+εX2}",
    "{X3}",
    "{X3+εX1}",
    "{X3+εX2}",
    "{X3+εX1+aX2}",
    "{X4}",
    "{X4+εX1}",
    "{X4+εX2}",
    "{X4+εX1+aX2}",
    "{X4+εX3}",
    "{X4+εX3+aX1}",
    "{X4+εX3+aX2}",
    "{X4+εX3+aX1+bX2}",
    "{X5}",
    "{X5+εX1}",
    "{X5+εX2}",
    "{X5+εX1+aX2}",
    "{X5+εX3}",
    "{X5+εX3+aX1}",
    "{X5+εX3+aX2}",
    "{X5+εX3+aX1+bX2}",
    "{X5+εX4}",
    "{X5+εX4+aX1}",
    "{X5+εX4+aX2}",
    "{X5+εX4+aX1+bX2}",
    "{X5+εX4+aX3}",
    "{X5+εX4+aX3+bX1}",
    "{X5+εX4+aX3+bX2}",
    "{X5+εX4+aX3+bX2+cX1}",
    "{X6}",
    "{X6+εX1}",
    "{X6+εX2}",
    "{X6+εX1+aX2}",
    "{X6+εX3}",
    "{X6+εX3+aX1}",
    "{X6+εX3+aX2}",
    "{X6+εX3+aX1+bX2}",
    "{X6+εX4}",
    "{X6+εX4+aX1}",
    "{X6+εX4+aX2}",
    "{X6+εX4+aX1+bX2}",
    "{X6+εX4+aX3}",
    "{X6+εX4+aX3+bX1}",
    "{X6+εX4+aX3+bX2}",
    "{X6+εX4+aX3+bX1+cX2}",
    "{X5+aX6}",
    "{X5+aX6+εX1}",
    "{X5+aX6+εX2}",
    "{X5+aX6+εX1+bX2}",
    "{X5+aX6+εX3}",
    "{X5+aX6+εX3+bX1}",
    "{X5+aX6+εX3+bX2}",
    "{X5+aX6+εX3+bX1+cX2}",
    "{X5+aX6+εX4}",
    "{X5+aX6+εX4+bX1}",
    "{X5+aX6+εX4+bX2}",
    "{X5+aX6+εX4+bX1+cX2}",
    "{X5+aX6+εX4+bX3}",
    "{X5+aX6+εX4+bX3+cX1}",
    "{X5+aX6+εX4+bX3+cX2}",
    "{X5+aX6+εX4+bX3+cX1+dX2}",
];

fn templates(case: CaseId) -> Vec<Template> {
    match case {
        CaseId::I | CaseId::II => SEMIDIRECT_I.iter().map(|l| Template::parse(case, None, l, &['a'])).collect(),
        CaseId::III => LIST_III.iter().map(|l| Template::parse(case, None, l, &['a'])).collect(),
        CaseId::IV | CaseId::V => LIST_POT
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let name = format!("L{}", i + 1);
                Template::parse(case, Some(&name), l, &['a', 'b', 'c', 'd'])
            })
            .collect(),
    }
}

/// The listed representatives for a case, in list order.
pub fn golden_list(case: CaseId) -> Vec<GoldenEntry> {
    templates(case).into_iter().map(|template| GoldenEntry { template }).collect()
}

/// `exp(parameter * generator)`, applied through the adjoint action.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjStep {
    pub generator: Vec<f64>,
    pub parameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub case: CaseId,
    pub label: String,
    pub name: Option<String>,
    pub params: Vec<(char, f64)>,
    pub representative: AlgebraElement,
    /// Steps in application order; `representative = scale * Ad(steps) X`.
    pub conjugator: Vec<ConjStep>,
    pub scale: f64,
    pub note: Option<String>,
    pub listed: bool,
}

impl Classification {
    pub fn param(&self, c: char) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == c).map(|(_, v)| *v)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            write!(f, "{} ", n)?;
        }
        write!(f, "{}", self.label)?;
        for (c, v) in &self.params {
            if *c == 'ε' {
                write!(f, ", ε={}", v.round() as i64)?;
            } else {
                write!(f, ", {}={:.6}", c, v)?;
            }
        }
        Ok(())
    }
}

/// Parses a linear combination such as `5*X1 + 7*X2 + X3` over the basis names.
pub fn parse_element(case: CaseId, names: &[String], text: &str) -> Result<AlgebraElement, LieError> {
    let e = parse(text).map_err(|err| LieError::BadElement(err.to_string()))?;
    for s in e.symbols() {
        if !names.iter().any(|n| n == &s) {
            return Err(LieError::BadElement(format!("`{}` is not a basis name", s)));
        }
    }
    let env = Env::new();
    let mut coeffs = Vec::with_capacity(names.len());
    for n in names {
        let d = differentiate(&e, n).map_err(|err| LieError::BadElement(err.to_string()))?;
        if !d.symbols().is_empty() {
            return Err(LieError::BadElement(format!("not linear in {}", n)));
        }
        coeffs.push(evaluate(&d, &env)?);
    }
    // no constant term
    let zero: Vec<(&str, Expr)> = names.iter().map(|n| (n.as_str(), Expr::zero())).collect();
    let c = evaluate(&crate::exprcore::subs(&e, &zero), &env)?;
    if c != 0.0 {
        return Err(LieError::BadElement("constant term".into()));
    }
    Ok(AlgebraElement::new(case, coeffs))
}

/// Applies the conjugator and scale, returning the largest deviation from the
/// representative relative to its norm.
pub fn verify_conjugator(alg: &NumericAlgebra, x: &AlgebraElement, cls: &Classification) -> f64 {
    let y = apply_steps(alg, &x.coeffs, &cls.conjugator);
    let r = &cls.representative.coeffs;
    let scale = r.iter().map(|v| v.abs()).fold(1.0, f64::max);
    y.iter().zip(r).map(|(a, b)| (cls.scale * a - b).abs()).fold(0.0, f64::max) / scale
}

fn apply_steps(alg: &NumericAlgebra, x: &[f64], steps: &[ConjStep]) -> Vec<f64> {
    let mut y = DVector::from_column_slice(x);
    for s in steps {
        let g: Vec<f64> = s.generator.iter().map(|v| v * s.parameter).collect();
        y = expm(&alg.ad(&g)) * y;
    }
    y.iter().copied().collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

const TOL: f64 = 1e-9;

/// Normal form of the subalgebra spanned by `x`.
///
/// Cases I, II, IV and V are semidirect: an abelian ideal acted on diagonally
/// by a two-dimensional torus. Components of the ideal with nonzero weight
/// under the torus part are removed by ideal translations; the survivors are
/// fitted to a listed template by torus dilations plus an overall scale.
/// Case III is split into its two direct summands and the su(1,1) part is
/// brought to a hyperbolic, parabolic or elliptic form with an explicit
/// SL(2) conjugator.
pub fn normalize(alg: &NumericAlgebra, x: &AlgebraElement) -> Result<Classification, LieError> {
    if x.coeffs.len() != alg.dim() {
        return Err(LieError::BadElement(format!("expected {} coefficients", alg.dim())));
    }
    if x.coeffs.iter().any(|v| !v.is_finite()) {
        return Err(LieError::BadElement("non-finite coefficient".into()));
    }
    if norm(&x.coeffs) == 0.0 {
        return Err(LieError::ZeroElement);
    }
    match alg.id {
        CaseId::III => normalize_direct(alg, x),
        _ => normalize_semidirect(alg, x),
    }
}

fn split(id: CaseId) -> (Vec<usize>, Vec<usize>) {
    if id.is_potential() {
        (vec![0, 1, 2, 3], vec![4, 5])
    } else {
        (vec![0, 1], vec![2, 3])
    }
}

fn normalize_semidirect(alg: &NumericAlgebra, x: &AlgebraElement) -> Result<Classification, LieError> {
    let n = alg.dim();
    let (ideal, torus) = split(alg.id);
    // weight of torus generator k on ideal generator i
    let weight = |k: usize, i: usize| alg.constant(k, i, i);
    let mut cur = x.coeffs.clone();
    let mut steps = Vec::new();
    let tau_norm = norm(&torus.iter().map(|k| cur[*k]).collect::<Vec<_>>());
    for &i in &ideal {
        let w: f64 = torus.iter().map(|&k| cur[k] * weight(k, i)).sum();
        if cur[i] != 0.0 && w.abs() > TOL * (1.0 + tau_norm) {
            // Ad(exp(theta X_i)) tau = tau - theta w X_i
            let theta = cur[i] / w;
            steps.push(ConjStep { generator: unit(n, i), parameter: theta });
            cur[i] = 0.0;
        }
    }
    let scale_ref = norm(&cur);
    let support: Vec<usize> = (0..n).filter(|&g| cur[g].abs() > TOL * scale_ref).collect();
    for g in 0..n {
        if !support.contains(&g) {
            cur[g] = 0.0;
        }
    }
    let tpl = templates(alg.id);
    for strict in [true, false] {
        for t in &tpl {
            if t.support(strict) != support {
                continue;
            }
            if let Some(mut c) = fit(alg, t, &cur, &torus, strict) {
                let mut all = steps.clone();
                all.extend(c.conjugator.drain(..));
                c.conjugator = all;
                return Ok(c);
            }
        }
    }
    // not in the list: scale the leading coefficient to 1
    let lead = torus.iter().chain(ideal.iter()).find(|&&g| cur[g] != 0.0).copied().unwrap_or(0);
    let lam = 1.0 / cur[lead];
    let rep: Vec<f64> = cur.iter().map(|v| v * lam).collect();
    Ok(Classification {
        case: alg.id,
        label: format_label(&alg.names, &rep),
        name: None,
        params: vec![],
        representative: AlgebraElement::new(alg.id, rep),
        conjugator: steps,
        scale: lam,
        note: Some("no listed class has this support".into()),
        listed: false,
    })
}

fn fit(alg: &NumericAlgebra, t: &Template, cur: &[f64], torus: &[usize], strict: bool) -> Option<Classification> {
    let n = alg.dim();
    let m = torus.len();
    let weight = |k: usize, g: usize| if torus.contains(&g) { 0.0 } else { alg.constant(k, g, g) };
    // rows: ln|lambda| + sum_k sigma_k w_k(g) = ln|target| - ln|c_g|
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut sign: Option<f64> = None;
    for s in &t.slots {
        let (g, w) = s.combo[0];
        let target = match s.kind {
            SlotKind::Lit(v) => v * w,
            SlotKind::Eps => 1.0,
            SlotKind::Param(_) => continue,
        };
        let c = cur[g];
        if c == 0.0 {
            return None;
        }
        let mut row = vec![1.0];
        row.extend(torus.iter().map(|&k| weight(k, g)));
        rows.push(row);
        rhs.push(target.abs().ln() - c.abs().ln());
        if let SlotKind::Lit(_) = s.kind {
            let sg = (target * c).signum();
            match sign {
                None => sign = Some(sg),
                Some(prev) if prev != sg => return None,
                _ => {}
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), m + 1, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(&rhs);
    let svd = a.clone().svd(true, true);
    let z = svd.solve(&b, 1e-12).ok()?;
    let resid = (&a * &z - &b).amax();
    if resid > 1e-9 {
        return None;
    }
    let lam = sign.unwrap_or(1.0) * z[0].exp();
    let sigma: Vec<f64> = z.iter().skip(1).copied().collect();
    let mut rep = vec![0.0; n];
    for g in 0..n {
        if cur[g] == 0.0 {
            continue;
        }
        let e: f64 = torus.iter().zip(&sigma).map(|(&k, s)| s * weight(k, g)).sum();
        rep[g] = lam * e.exp() * cur[g];
    }
    let mut params = Vec::new();
    let mut note = None;
    for s in &t.slots {
        let (g, w) = s.combo[0];
        match s.kind {
            SlotKind::Eps => {
                let e = rep[g].signum();
                rep[g] = e;
                params.push(('ε', e));
            }
            SlotKind::Param(c) => {
                let v = rep[g] / w;
                if !strict && t.nonzero.contains(&c) {
                    note = Some(format!("{}=0 lies outside the listed range {}≠0; boundary class", c, c));
                }
                params.push((c, v));
            }
            SlotKind::Lit(v) => rep[g] = v * w,
        }
    }
    params.sort_by_key(|(c, _)| if *c == 'ε' { 'z' } else { *c });
    let mut conj = Vec::new();
    if sigma.iter().any(|s| *s != 0.0) {
        let mut gen = vec![0.0; n];
        for (&k, s) in torus.iter().zip(&sigma) {
            gen[k] = *s;
        }
        conj.push(ConjStep { generator: gen, parameter: 1.0 });
    }
    Some(Classification {
        case: alg.id,
        label: t.label.clone(),
        name: t.name.clone(),
        params,
        representative: AlgebraElement::new(alg.id, rep),
        conjugator: conj,
        scale: lam,
        note,
        listed: true,
    })
}

fn format_label(names: &[String], v: &[f64]) -> String {
    let mut s = String::from("{");
    let mut first = true;
    for (c, n) in v.iter().zip(names) {
        if *c == 0.0 {
            continue;
        }
        if !first && *c > 0.0 {
            s.push('+');
        }
        if (*c - 1.0).abs() < 1e-12 {
        } else if (*c + 1.0).abs() < 1e-12 {
            s.push('-');
        } else {
            s.push_str(&format!("{:.6}", c));
        }
        s.push_str(n);
        first = false;
    }
    s.push('}');
    s
}

// case III: basis X1..X5 at indices 0..4; A = X3 - X4, B = X1, su(1,1) = {X2, X4, X5}
type M2 = [[f64; 2]; 2];

fn rho(c2: f64, c4: f64, c5: f64) -> M2 {
    [[c4 / 2.0, c5], [-c2, -c4 / 2.0]]
}

fn mv(a: &M2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn det(p: &M2) -> f64 {
    p[0][0] * p[1][1] - p[0][1] * p[1][0]
}

fn cols(p1: [f64; 2], p2: [f64; 2]) -> M2 {
    [[p1[0], p2[0]], [p1[1], p2[1]]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sl2Class {
    Zero,
    Hyperbolic,
    Parabolic,
    Elliptic,
}

// P with M P = P N and det P = 1, for the target N = rho(n2, n4, n5) of the same class
fn intertwiner(m: &M2, class: Sl2Class, n: (f64, f64, f64)) -> M2 {
    let p = match class {
        Sl2Class::Zero => return [[1.0, 0.0], [0.0, 1.0]],
        Sl2Class::Hyperbolic => {
            let h = n.1 / 2.0;
            let eig = |l: f64| {
                let a = [m[0][1], l - m[0][0]];
                let b = [l - m[1][1], m[1][0]];
                if a[0].hypot(a[1]) >= b[0].hypot(b[1]) {
                    a
                } else {
                    b
                }
            };
            let v1 = eig(h);
            let mut v2 = eig(-h);
            if det(&cols(v1, v2)) < 0.0 {
                v2 = [-v2[0], -v2[1]];
            }
            cols(v1, v2)
        }
        Sl2Class::Parabolic => {
            // N e1 = -n2 e2, N e2 = 0
            let p1 = if mv(m, [1.0, 0.0]).iter().any(|v| v.abs() > 0.0) { [1.0, 0.0] } else { [0.0, 1.0] };
            let mp = mv(m, p1);
            cols(p1, [-mp[0] / n.0, -mp[1] / n.0])
        }
        Sl2Class::Elliptic => {
            // N e1 = -k e2, N e2 = k e1
            let mp = mv(m, [1.0, 0.0]);
            cols([1.0, 0.0], [-mp[0] / n.2, -mp[1] / n.2])
        }
    };
    let d = det(&p);
    let r = d.sqrt();
    [[p[0][0] / r, p[0][1] / r], [p[1][0] / r, p[1][1] / r]]
}

// steps realising Ad(g) for g in SL(2) via g = k a n
fn sl2_steps(g: &M2) -> Vec<ConjStep> {
    let r11 = g[0][0].hypot(g[1][0]);
    let q1 = [g[0][0] / r11, g[1][0] / r11];
    let r12 = q1[0] * g[0][1] + q1[1] * g[1][1];
    let (c, s) = (q1[0], q1[1]);
    let theta = (-s).atan2(c);
    let phi = r11.ln();
    let psi = r12 / r11;
    let mut out = Vec::new();
    if psi != 0.0 {
        out.push(ConjStep { generator: vec![0.0, 0.0, 0.0, 0.0, 1.0], parameter: psi });
    }
    if phi != 0.0 {
        out.push(ConjStep { generator: vec![0.0, 0.0, 0.0, 1.0, 0.0], parameter: 2.0 * phi });
    }
    if theta != 0.0 {
        out.push(ConjStep { generator: vec![0.0, 1.0, 0.0, 0.0, 1.0], parameter: theta });
    }
    out
}

fn inverse(p: &M2) -> M2 {
    let d = det(p);
    [[p[1][1] / d, -p[0][1] / d], [-p[1][0] / d, p[0][0] / d]]
}

fn normalize_direct(alg: &NumericAlgebra, x: &AlgebraElement) -> Result<Classification, LieError> {
    let c = &x.coeffs;
    let total = norm(c);
    let alpha = c[2];
    let beta = c[0];
    let (c2, c4, c5) = (c[1], c[2] + c[3], c[4]);
    let s_norm = norm(&[c2, c4, c5]);
    let alpha = if alpha.abs() > TOL * total { alpha } else { 0.0 };
    let beta = if beta.abs() > TOL * total { beta } else { 0.0 };
    let d = c4 * c4 - 4.0 * c2 * c5;
    let class = if s_norm <= TOL * total {
        Sl2Class::Zero
    } else if d.abs() <= TOL * total * total {
        Sl2Class::Parabolic
    } else if d > 0.0 {
        Sl2Class::Hyperbolic
    } else {
        Sl2Class::Elliptic
    };
    let sigma = if (c2 + c5) >= 0.0 { 1.0 } else { -1.0 };
    let kappa = if c2 >= 0.0 { 1.0 } else { -1.0 } * (-d).max(0.0).sqrt() / 2.0;
    let sqrt_d = d.max(0.0).sqrt();
    let a_sign = if alpha < 0.0 { -1.0 } else { 1.0 };
    let b_sign = if beta < 0.0 { -1.0 } else { 1.0 };

    // target su(1,1) normal form (coefficients of X2, X4, X5) before the ray scale
    let target = match class {
        Sl2Class::Zero => (0.0, 0.0, 0.0),
        Sl2Class::Hyperbolic => {
            let h = if alpha != 0.0 {
                a_sign * sqrt_d
            } else if beta != 0.0 {
                b_sign * sqrt_d
            } else {
                sqrt_d
            };
            (0.0, h, 0.0)
        }
        Sl2Class::Parabolic => {
            let t = if alpha != 0.0 { alpha.abs() } else { 1.0 };
            (sigma * t, 0.0, 0.0)
        }
        Sl2Class::Elliptic => (kappa, 0.0, kappa),
    };
    let m = rho(c2, c4, c5);
    let mut steps = Vec::new();
    if class != Sl2Class::Zero {
        let p = intertwiner(&m, class, target);
        steps.extend(sl2_steps(&inverse(&p)));
    }
    let n5 = alg.dim();
    let a_gen = vec![0.0, 0.0, 1.0, -1.0, 0.0];
    // direct summand {A, B}
    let (lam, b_after) = if alpha != 0.0 {
        if beta != 0.0 {
            steps.push(ConjStep { generator: unit(n5, 0), parameter: -beta / alpha });
        }
        (1.0 / alpha, 0.0)
    } else if beta != 0.0 {
        let lam_abs = match class {
            Sl2Class::Zero => 1.0 / beta.abs(),
            Sl2Class::Hyperbolic => 1.0 / sqrt_d,
            Sl2Class::Parabolic => 1.0,
            Sl2Class::Elliptic => 1.0 / kappa.abs(),
        };
        let lam = b_sign * lam_abs;
        // lam e^{-phi} beta = 1
        let phi = (lam * beta).ln();
        if phi != 0.0 {
            steps.push(ConjStep { generator: a_gen.clone(), parameter: phi });
        }
        (lam, 1.0 / lam)
    } else {
        let lam = match class {
            Sl2Class::Hyperbolic => 1.0 / sqrt_d,
            Sl2Class::Parabolic => sigma,
            Sl2Class::Elliptic => 1.0 / kappa,
            Sl2Class::Zero => unreachable!("nonzero element"),
        };
        (lam, 0.0)
    };
    let mut rep = vec![0.0; 5];
    rep[0] = lam * b_after;
    rep[2] = lam * alpha;
    rep[3] = lam * (target.1 - alpha);
    rep[1] = lam * target.0;
    rep[4] = lam * target.2;
    for v in rep.iter_mut() {
        if v.abs() < 1e-15 {
            *v = 0.0;
        }
    }
    let (label, params, listed): (&str, Vec<(char, f64)>, bool) = match (alpha != 0.0, beta != 0.0, class) {
        (true, _, Sl2Class::Zero) => ("{X3-X4}", vec![], true),
        (true, _, Sl2Class::Hyperbolic) => ("{X3+aX4}", vec![('a', sqrt_d / alpha.abs() - 1.0)], true),
        (true, _, Sl2Class::Parabolic) => ("{X3-X4+εX2}", vec![('ε', a_sign * sigma)], true),
        (true, _, Sl2Class::Elliptic) => ("{X3-X4+a(X2+X5)}", vec![('a', kappa / alpha)], false),
        (false, true, Sl2Class::Zero) => ("{X1}", vec![], true),
        (false, true, Sl2Class::Hyperbolic) => ("{X1+εX4}", vec![('ε', 1.0)], true),
        (false, true, Sl2Class::Parabolic) => ("{X1+εX2}", vec![('ε', b_sign * sigma)], true),
        (false, true, Sl2Class::Elliptic) => ("{X1+ε(X2+X5)}", vec![('ε', b_sign * kappa.signum())], false),
        (false, false, Sl2Class::Hyperbolic) => ("{X4}", vec![], true),
        (false, false, Sl2Class::Parabolic) => ("{X2}", vec![], true),
        (false, false, Sl2Class::Elliptic) => ("{X2+X5}", vec![], false),
        (false, false, Sl2Class::Zero) => unreachable!("nonzero element"),
    };
    // pin the discrete coefficients exactly
    if label == "{X3-X4+εX2}" {
        rep[1] = params[0].1;
    }
    if label == "{X1+εX2}" {
        rep[1] = params[0].1;
    }
    if label == "{X1+εX4}" {
        rep[3] = 1.0;
    }
    let mut note = None;
    if label == "{X3+aX4}" && params[0].1.abs() <= TOL {
        note = Some("a=0 lies outside the listed range a≠0; boundary class".to_string());
    }
    if !listed {
        note = Some("elliptic su(1,1) component; no listed class contains it".to_string());
    }
    Ok(Classification {
        case: alg.id,
        label: label.to_string(),
        name: None,
        params,
        representative: AlgebraElement::new(alg.id, rep),
        conjugator: steps,
        scale: lam,
        note,
        listed,
    })
}
