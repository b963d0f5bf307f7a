//! Adaptive Simpson quadrature, Brent root finding, Dormand-Prince RK45 and
//! finite-difference checks of symbolic derivatives.

use crate::exprcore::{differentiate, evaluate, DiffError, Env, EvalError, Expr};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("quadrature exceeded max depth on [{lo}, {hi}]")]
    MaxDepth { lo: f64, hi: f64 },
    #[error("integrand not finite at {at}")]
    NonFinite { at: f64 },
    #[error("no sign change on [{lo}, {hi}] (f: {flo}, {fhi})")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("root finding did not converge")]
    NoConvergence,
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

pub struct QuadratureSpec<F: Fn(f64) -> f64> {
    pub integrand: F,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub max_depth: u32,
}

impl<F: Fn(f64) -> f64> QuadratureSpec<F> {
    pub fn new(integrand: F, lo: f64, hi: f64) -> Self {
        QuadratureSpec { integrand, lo, hi, tol: 1e-12, max_depth: 50 }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Adaptive Simpson with Richardson correction.
pub fn integrate<F: Fn(f64) -> f64>(spec: &QuadratureSpec<F>) -> Result<Quad, NumError> {
    if !(spec.tol > 0.0) || !spec.lo.is_finite() || !spec.hi.is_finite() {
        return Err(NumError::Invalid("tolerance must be positive and bounds finite".into()));
    }
    let f = |x: f64| -> Result<f64, NumError> {
        let v = (spec.integrand)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumError::NonFinite { at: x })
        }
    };
    let (a, b) = (spec.lo, spec.hi);
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let v = simpson_rec(&f, a, b, fa, fm, fb, whole, spec.tol, spec.max_depth, &mut err)?;
    Ok(Quad { value: v, error: err })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> Result<f64, NumError>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> Result<f64, NumError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(NumError::MaxDepth { lo: a, hi: b });
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, err)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, err)?;
    Ok(l + r)
}

pub struct RootBracket<F: Fn(f64) -> f64> {
    pub f: F,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

/// Brent's method: inverse quadratic interpolation guarded by bisection.
pub fn find_root<F: Fn(f64) -> f64>(b: &RootBracket<F>) -> Result<f64, NumError> {
    let f = &b.f;
    let (mut a, mut c) = (b.lo, b.hi);
    let (mut fa, mut fc) = (f(a), f(c));
    if !fa.is_finite() || !fc.is_finite() {
        return Err(NumError::NonFinite { at: if fa.is_finite() { c } else { a } });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fc == 0.0 {
        return Ok(c);
    }
    if fa.signum() == fc.signum() {
        return Err(NumError::NoSignChange { lo: a, hi: c, flo: fa, fhi: fc });
    }
    // b_ is the best estimate, a the previous one, c the contrapoint
    let mut b_ = c;
    let mut fb = fc;
    c = a;
    fc = fa;
    let mut d = b_ - a;
    let mut e = d;
    // x-resolution; refined when the bracket is tight but |f| is not yet below tol
    let mut xtol = b.tol;
    for _ in 0..400 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b_ - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b_;
            b_ = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let mut tol1 = 2.0 * f64::EPSILON * b_.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b_);
        if (xm.abs() <= tol1 && fb.abs() < b.tol.max(f64::MIN_POSITIVE)) || fb == 0.0 {
            return Ok(b_);
        }
        if xm.abs() <= tol1 {
            xtol *= 1e-3;
            tol1 = 2.0 * f64::EPSILON * b_.abs() + 0.5 * xtol;
        }
        if xm.abs() <= 2.0 * f64::EPSILON * b_.abs() {
            // bracket collapsed to round-off
            return Ok(b_);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b_ - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b_;
        fa = fb;
        b_ += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b_);
        if !fb.is_finite() {
            return Err(NumError::NonFinite { at: b_ });
        }
    }
    Err(NumError::NoConvergence)
}

/// Accepted steps of an ODE integration.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl OdeSolution {
    pub fn last(&self) -> (f64, &[f64]) {
        let n = self.t.len() - 1;
        (self.t[n], &self.y[n])
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Adaptive Dormand-Prince integration of `y' = rhs(t, y)` over `span`.
///
/// `tol` is used as both absolute and relative local tolerance. Works for
/// decreasing spans as well.
pub fn integrate_ode(
    rhs: impl Fn(f64, &[f64]) -> Vec<f64>,
    y0: &[f64],
    span: (f64, f64),
    tol: f64,
) -> Result<OdeSolution, NumError> {
    let (t0, t1) = span;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = OdeSolution { t: vec![t0], y: vec![y.clone()] };
    if t0 == t1 {
        return Ok(out);
    }
    let mut h = dir * ((t1 - t0).abs() * 1e-3).max(1e-12).min(0.1);
    let hmin = 1e-14 * (1.0 + t0.abs().max(t1.abs()));
    let mut k = vec![vec![0.0; n]; 7];
    k[0] = rhs(t, &y);
    for _ in 0..10_000_000u64 {
        if (t1 - t) * dir <= 0.0 {
            break;
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..n {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = rhs(t + C[s] * h, &ys);
        }
        let mut y5 = y.clone();
        let mut errn: f64 = 0.0;
        for i in 0..n {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
            errn = errn.max((h * (d5 - d4)).abs() / sc);
        }
        if !errn.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h.abs() < hmin {
                return Err(NumError::StepUnderflow { t });
            }
            continue;
        }
        if errn <= 1.0 {
            t += h;
            y = y5;
            k[0] = k[6].clone();
            out.t.push(t);
            out.y.push(y.clone());
        }
        let fac = if errn == 0.0 { 5.0 } else { (0.9 * errn.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < hmin {
            return Err(NumError::StepUnderflow { t });
        }
    }
    Ok(out)
}

/// `|central difference - symbolic derivative| / (1 + |symbolic|)`.
pub fn fd_check(e: &Expr, var: &str, env: &Env, h: f64) -> Result<f64, NumError> {
    let d = differentiate(e, var)?;
    let x0 = env.get(var).ok_or_else(|| EvalError::Unbound(var.to_string()))?;
    let sym = evaluate(&d, env)?;
    let mut ep = env.clone();
    ep.set(var, x0 + h);
    let mut em = env.clone();
    em.set(var, x0 - h);
    let fd = (evaluate(e, &ep)? - evaluate(e, &em)?) / (2.0 * h);
    Ok((fd - sym).abs() / (1.0 + sym.abs()))
}
