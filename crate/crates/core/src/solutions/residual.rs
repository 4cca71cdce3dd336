//! Pseudospectral check that a closed-form family solves the zero-energy equation.

use crate::error::Result;
use crate::spectral::{Fft2, Grid};
use crate::Complex64;

use super::{eval_solution, eval_solution_dt, w_field, SolutionSpec};

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative residual `||v_t - 2[d_x(v_xx - 3 v_yy) + div(v w)]|| / max(term norms)`.
///
/// Spatial derivatives are spectral on `grid`; `v_t` and `w` come from the closed forms.
pub fn nv_residual(spec: &SolutionSpec, t: f64, grid: &Grid) -> Result<f64> {
    spec.validate()?;
    let n = grid.n;
    let mut v = Vec::with_capacity(n * n);
    let mut vt = Vec::with_capacity(n * n);
    let mut f1 = Vec::with_capacity(n * n);
    let mut f2 = Vec::with_capacity(n * n);
    for j in 0..n {
        let y = grid.coord(j);
        for i in 0..n {
            let x = grid.coord(i);
            let (val, _) = eval_solution(spec, t, x, y)?;
            let w = w_field(spec, t, x, y)?;
            v.push(val);
            vt.push(eval_solution_dt(spec, t, x, y)?);
            f1.push(val * w.re);
            f2.push(val * w.im);
        }
    }
    let mut fft = Fft2::new(n);
    let mut vh = fft.forward_real(&v);
    let mut f1h = fft.forward_real(&f1);
    let f2h = fft.forward_real(&f2);
    let i = Complex64::new(0.0, 1.0);
    for j in 0..n {
        let k2 = grid.wavenumber(j);
        for m in 0..n {
            let k1 = grid.wavenumber(m);
            let idx = j * n + m;
            if grid.is_nyquist(m) || grid.is_nyquist(j) {
                vh[idx] = Complex64::new(0.0, 0.0);
                f1h[idx] = Complex64::new(0.0, 0.0);
                continue;
            }
            vh[idx] *= i * k1 * (3.0 * k2 * k2 - k1 * k1);
            f1h[idx] = i * k1 * f1h[idx] + i * k2 * f2h[idx];
        }
    }
    fft.inverse(&mut vh);
    fft.inverse(&mut f1h);
    let lin: Vec<f64> = vh.iter().map(|c| 2.0 * c.re).collect();
    let nl: Vec<f64> = f1h.iter().map(|c| 2.0 * c.re).collect();
    let res: Vec<f64> = (0..n * n).map(|k| vt[k] - lin[k] - nl[k]).collect();
    let scale = l2(&vt).max(l2(&lin)).max(l2(&nl));
    Ok(if scale == 0.0 { 0.0 } else { l2(&res) / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_lump_residual() {
        let r = nv_residual(&SolutionSpec::Q1ab { a: 0.0, b: 0.0 }, 0.0, &Grid::new(512, 30.0)).unwrap();
        assert!(r < 1e-3, "{r}");
    }
}
