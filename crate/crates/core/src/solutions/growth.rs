//! `L^2` growth of `Q_{n,0}` and the root-location law.
//!
//! With `w = P_n(t, z)` the area element is `dA_w = |P_n'|^2 dA_z`, so
//! `||Q||^2 = 64 int sum_k |P_n'(z_k(w))|^2 (1 + |w|^2)^{-4} dA_w` where `z_k(w)` runs over the
//! `n` preimages. The integrand stays bounded as the roots of `P_n` spread out.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{NvError, Result};
use crate::fit::{loglog_fit, SlopeFit};
use crate::quad::GaussLegendre;
use crate::Complex64;

use super::gh::{gh_poly, horner, GhPoly};

/// Roots of the monic polynomial `z^n + a[n-1] z^{n-1} + ... + a[0]` by Aberth iteration.
///
/// `guess`, if given, seeds the iteration.
pub fn poly_roots(a: &[Complex64], guess: Option<&[Complex64]>) -> Vec<Complex64> {
    let n = a.len();
    if n == 0 {
        return vec![];
    }
    let eval = |z: Complex64| {
        let mut p = Complex64::new(1.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for c in a.iter().rev() {
            d = d * z + p;
            p = p * z + c;
        }
        (p, d)
    };
    let bound = a.iter().enumerate().map(|(k, c)| c.norm().powf(1.0 / (n - k) as f64)).fold(0.0, f64::max) * 2.0 + 1e-3;
    let mut z: Vec<Complex64> = match guess {
        Some(g) if g.len() == n => g.to_vec(),
        _ => {
            (0..n).map(|k| Complex64::from_polar(bound * 0.5 + 0.1, 2.0 * PI * (k as f64 + 0.25) / n as f64)).collect()
        }
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, d) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / d;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        1.0 / diff
                    }
                })
                .sum();
            let step = ratio / (1.0 - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            } else {
                let kick = Complex64::new(1e-3, 1e-3) * (1.0 + z[i].norm());
                z[i] += kick;
                moved = 1.0;
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Root of `P_n(t, .)` of largest modulus, if nonzero.
pub fn nonzero_root(p: &GhPoly, t: f64) -> Option<Complex64> {
    let dense = p.dense(t);
    let a: Vec<Complex64> = dense[..p.n].iter().map(|&c| Complex64::new(c, 0.0)).collect();
    poly_roots(&a, None).into_iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).filter(|z| z.norm() > 1e-12)
}

/// `||Q_{n,0}(t)||_{L^2}^2` via the substitution `w = P_n(t, z)`.
pub fn l2_norm_squared(n: usize, t: f64) -> Result<f64> {
    l2_norm_squared_with(n, t, 32, 512)
}

pub(crate) fn l2_norm_squared_with(n: usize, t: f64, panels: usize, n_theta: usize) -> Result<f64> {
    if n < 1 {
        return Err(NvError::invalid("n must be at least 1"));
    }
    let p = gh_poly(n)?;
    let dense = p.dense(t);
    let gl = GaussLegendre::get(20);
    // w = tan(sigma) e^{i theta}; dA = tan(sigma) sec^2(sigma); (1 + |w|^2)^{-4} = cos^8(sigma)
    let hs = 0.5 * PI / panels as f64;
    let mut total = 0.0;
    let mut roots: Option<Vec<Complex64>> = None;
    for k in 0..panels {
        for (x, wgt) in gl.nodes.iter().zip(&gl.weights) {
            let sigma = hs * (k as f64 + 0.5 * (1.0 + x));
            let (rho, cs) = (sigma.tan(), sigma.cos());
            let jac = rho * cs.powi(6);
            let mut ring = 0.0;
            for m in 0..n_theta {
                let w = Complex64::from_polar(rho, 2.0 * PI * m as f64 / n_theta as f64);
                let mut a: Vec<Complex64> = dense[..n].iter().map(|&c| Complex64::new(c, 0.0)).collect();
                a[0] -= w;
                let z = poly_roots(&a, roots.as_deref());
                ring += z.iter().map(|&zk| horner(&dense, zk).1.norm_sqr()).sum::<f64>();
                roots = Some(z);
            }
            total += wgt * hs * 0.5 * jac * ring * 2.0 * PI / n_theta as f64;
        }
    }
    let r = 64.0 * total;
    if !r.is_finite() {
        return Err(NvError::ResolutionInsufficient("non-finite L2 quadrature".into()));
    }
    Ok(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct L2Row {
    pub t: f64,
    pub l2_sq: f64,
    pub root_abs: f64,
    pub root_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct L2Growth {
    pub n: usize,
    pub rows: Vec<L2Row>,
    pub fit: SlopeFit,
    pub monotone: bool,
}

impl L2Growth {
    /// Spread `max/min` of `|z_0(t)| / t^{1/3}` over the grid.
    pub fn root_ratio_spread(&self) -> f64 {
        let v: Vec<f64> = self.rows.iter().map(|r| r.root_ratio).filter(|r| *r > 0.0).collect();
        let mx = v.iter().cloned().fold(f64::MIN, f64::max);
        let mn = v.iter().cloned().fold(f64::MAX, f64::min);
        mx / mn
    }
}

pub fn l2_growth(n: usize, t_grid: &[f64]) -> Result<L2Growth> {
    if n < 3 {
        return Err(NvError::invalid("L2 growth needs n >= 3"));
    }
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(NvError::invalid("need at least two positive times"));
    }
    let p = gh_poly(n)?;
    let mut rows = Vec::new();
    for &t in t_grid {
        let l2_sq = l2_norm_squared(n, t)?;
        let root_abs = nonzero_root(&p, t).map(|z| z.norm()).unwrap_or(0.0);
        rows.push(L2Row { t, l2_sq, root_abs, root_ratio: root_abs / t.cbrt() });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.l2_sq).collect();
    let monotone = ys.windows(2).all(|w| w[1] > w[0]);
    Ok(L2Growth { n, fit: loglog_fit(&ts, &ys), rows, monotone })
}
