use super::adjoint::{expm, AlgebraElement, NumericAlgebra};
use nalgebra::DVector;
use rand::Rng;

/// Nelder-Mead search over the group coordinates of `prod_i exp(g_i X_i)`.
#[derive(Debug, Clone)]
pub struct OrbitSearch {
    pub restarts: usize,
    pub max_iter: usize,
    pub range: f64,
    pub tol: f64,
}

impl Default for OrbitSearch {
    fn default() -> Self {
        OrbitSearch { restarts: 12, max_iter: 4000, range: 3.0, tol: 1e-14 }
    }
}

// sine of the angle between two rays
fn ray_distance(u: &DVector<f64>, r: &DVector<f64>) -> f64 {
    let nu = u.norm();
    let nr = r.norm();
    if nu == 0.0 || nr == 0.0 {
        return 1.0;
    }
    let rh = r / nr;
    (u - &rh * u.dot(&rh)).norm() / nu
}

fn act(alg: &NumericAlgebra, g: &[f64], x: &DVector<f64>) -> DVector<f64> {
    let n = alg.dim();
    let mut y = x.clone();
    for i in (0..n).rev() {
        if g[i] == 0.0 {
            continue;
        }
        let mut e = vec![0.0; n];
        e[i] = g[i];
        y = expm(&alg.ad(&e)) * y;
    }
    y
}

/// Smallest ray distance found between the orbit of `x` and the ray of `target`.
pub fn orbit_distance<R: Rng + ?Sized>(
    alg: &NumericAlgebra,
    x: &AlgebraElement,
    target: &AlgebraElement,
    search: &OrbitSearch,
    rng: &mut R,
) -> f64 {
    let xv = DVector::from_column_slice(&x.coeffs);
    let tv = DVector::from_column_slice(&target.coeffs);
    let f = |g: &[f64]| ray_distance(&act(alg, g, &xv), &tv);
    let n = alg.dim();
    let mut best = f(&vec![0.0; n]);
    for r in 0..search.restarts {
        let start: Vec<f64> =
            if r == 0 { vec![0.0; n] } else { (0..n).map(|_| rng.gen_range(-search.range..search.range)).collect() };
        let (_, v) = nelder_mead(&f, start, 0.5, search.max_iter, search.tol);
        best = best.min(v);
        if best < search.tol.sqrt() * 1e-2 {
            break;
        }
    }
    best
}

pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: Vec<f64>,
    step: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.clone(), f(&start)));
    for i in 0..n {
        let mut p = start.clone();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= tol && simplex[0].1 <= tol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = best.iter().zip(&s.0).map(|(b, w)| b + 0.5 * (w - b)).collect();
                    let v = f(&p);
                    *s = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
