use super::{CaseId, LieAlgebraCase, LieError, Params};
use nalgebra::{DMatrix, DVector};

/// Algebra with parameters bound: numeric structure constants.
#[derive(Debug, Clone)]
pub struct NumericAlgebra {
    pub id: CaseId,
    pub names: Vec<String>,
    pub params: Params,
    c: Vec<Vec<Vec<f64>>>,
}

impl LieAlgebraCase {
    pub fn numeric(&self, params: &Params) -> Result<NumericAlgebra, LieError> {
        Ok(NumericAlgebra {
            id: self.id,
            names: self.names.clone(),
            params: params.clone(),
            c: self.numeric_constants(params)?,
        })
    }
}

/// Coefficient vector over a case basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub case: CaseId,
    pub coeffs: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(case: CaseId, coeffs: Vec<f64>) -> Self {
        AlgebraElement { case, coeffs }
    }

    pub fn basis(case: CaseId, dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        AlgebraElement { case, coeffs: c }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        AlgebraElement { case: self.case, coeffs: self.coeffs.iter().map(|v| v * k).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|v| *v == 0.0)
    }

    pub fn format(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (v, n) in self.coeffs.iter().zip(names) {
            if *v == 0.0 {
                continue;
            }
            if !s.is_empty() {
                s.push_str(if *v < 0.0 { " - " } else { " + " });
            } else if *v < 0.0 {
                s.push('-');
            }
            s.push_str(&format!("{}*{}", fmt_num(v.abs()), n));
        }
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{:.6}", v)
    }
}

impl NumericAlgebra {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += x[i] * y[j] * self.c[i][j][k];
                }
            }
        }
        out
    }

    pub fn ad(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                if y[i] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    m[(k, j)] += y[i] * self.c[i][j][k];
                }
            }
        }
        m
    }

    /// `Ad(exp(Y)) X`, exact (matrix exponential) when `order` is `None`.
    pub fn conjugate(&self, y: &[f64], x: &[f64], order: Option<usize>) -> Vec<f64> {
        let a = self.ad(y);
        let xv = DVector::from_column_slice(x);
        let r = match order {
            None => expm(&a) * xv,
            Some(k) => {
                let mut term = xv.clone();
                let mut acc = xv;
                for m in 1..=k {
                    term = &a * term / (m as f64);
                    acc += &term;
                }
                acc
            }
        };
        r.iter().copied().collect()
    }
}

/// Matrix of `ad Y` in the case basis: column j holds `[Y, X_j]`.
pub fn ad_matrix(alg: &NumericAlgebra, y: &AlgebraElement) -> DMatrix<f64> {
    alg.ad(&y.coeffs)
}

/// Truncated (`Some(order)`) or exact (`None`) adjoint action `e^{ad Y} X`.
pub fn bch_conjugate(
    alg: &NumericAlgebra,
    y: &AlgebraElement,
    x: &AlgebraElement,
    order: Option<usize>,
) -> AlgebraElement {
    AlgebraElement { case: x.case, coeffs: alg.conjugate(&y.coeffs, &x.coeffs, order) }
}

/// Scaling and squaring with a Taylor series truncated at relative 1e-14.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = a * scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..60 {
        term = &term * &b / (k as f64);
        sum += &term;
        let tn = term.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let sn = sum.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tn <= 1e-14 * sn.max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
