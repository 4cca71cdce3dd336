//! Polar quadrature of `int v dx dy` with a power-law tail correction.

use std::f64::consts::PI;

use crate::error::{NvError, Result};
use crate::quad::GaussLegendre;

use super::{eval_solution, SolutionSpec};

#[derive(Debug, Clone, Copy)]
pub struct MassOptions {
    /// Outer radius in units of the solution's length scale.
    pub r_int_factor: f64,
    pub rel_tol: f64,
}

impl Default for MassOptions {
    fn default() -> Self {
        MassOptions { r_int_factor: 512.0, rel_tol: 1e-9 }
    }
}

/// Angular integral `int_0^{2pi} f(c + r e^{i theta}) d theta` by trapezoid, doubled to convergence.
pub(crate) fn ring_integral(
    f: &impl Fn(f64, f64) -> Result<f64>,
    cx: f64,
    cy: f64,
    r: f64,
    rel_tol: f64,
) -> Result<f64> {
    let eval = |n: usize, offset: bool| -> Result<(f64, f64)> {
        let mut s = 0.0;
        let mut a = 0.0;
        for k in 0..n {
            let th = 2.0 * PI * (k as f64 + if offset { 0.5 } else { 0.0 }) / n as f64;
            let v = f(cx + r * th.cos(), cy + r * th.sin())?;
            s += v;
            a += v.abs();
        }
        Ok((s, a))
    };
    let mut n = 32;
    let (mut sum, mut abs) = eval(n, false)?;
    loop {
        // doubling reuses the previous samples: add the midpoints
        let (s2, a2) = eval(n, true)?;
        let old = sum / n as f64;
        sum += s2;
        abs += a2;
        n *= 2;
        let new = sum / n as f64;
        if (new - old).abs() <= rel_tol * (abs / n as f64) + 1e-300 || n >= 1 << 17 {
            return Ok(2.0 * PI * new);
        }
    }
}

fn panel(g: &impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let gl = GaussLegendre::get(20);
    let (h, m) = (0.5 * (b - a), 0.5 * (a + b));
    let mut s = 0.0;
    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
        s += w * g(m + h * x)?;
    }
    Ok(h * s)
}

fn adaptive(g: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = panel(g, a, m)?;
    let right = panel(g, m, b)?;
    if (left + right - whole).abs() <= tol || depth >= 24 {
        return Ok(left + right);
    }
    Ok(adaptive(g, a, m, left, 0.5 * tol, depth + 1)? + adaptive(g, m, b, right, 0.5 * tol, depth + 1)?)
}

/// `int f dA` over the plane, centred at `(cx, cy)` with length scale `scale`.
///
/// Radial panels double geometrically out to `r_int_factor * scale`; the remainder is
/// estimated from a fitted `r^{-p}` decay of the angular mean.
pub(crate) fn polar_integral(
    f: impl Fn(f64, f64) -> Result<f64>,
    cx: f64,
    cy: f64,
    scale: f64,
    opts: &MassOptions,
) -> Result<f64> {
    let ring = |r: f64| -> Result<f64> { Ok(r * ring_integral(&f, cx, cy, r, 1e-12)?) };
    let r_int = opts.r_int_factor * scale;
    let mut edges = vec![0.0];
    let mut r = scale / 16.0;
    while r < r_int {
        edges.push(r);
        r *= 2.0;
    }
    edges.push(r_int);
    let coarse: Vec<f64> = edges.windows(2).map(|w| panel(&ring, w[0], w[1])).collect::<Result<_>>()?;
    let scale_total: f64 = coarse.iter().map(|c| c.abs()).sum::<f64>().max(1e-300);
    let mut total = 0.0;
    for (w, c) in edges.windows(2).zip(&coarse) {
        total += adaptive(&ring, w[0], w[1], *c, opts.rel_tol * scale_total, 0)?;
    }
    let m1 = ring_integral(&f, cx, cy, r_int, 1e-12)?;
    let m0 = ring_integral(&f, cx, cy, 0.5 * r_int, 1e-12)?;
    if m1 != 0.0 && m0 != 0.0 && m1.signum() == m0.signum() {
        let p = (m0 / m1).ln() / 2f64.ln();
        if p > 2.05 {
            total += m1 * r_int * r_int / (p - 2.0);
        }
    }
    if !total.is_finite() {
        return Err(NvError::ResolutionInsufficient("non-finite quadrature result".into()));
    }
    Ok(total)
}

/// `int v(t, x, y) dx dy` with default accuracy settings.
pub fn mass(spec: &SolutionSpec, t: f64) -> Result<f64> {
    mass_with(spec, t, &MassOptions::default())
}

pub fn mass_with(spec: &SolutionSpec, t: f64, opts: &MassOptions) -> Result<f64> {
    spec.validate()?;
    let (cx, cy, s) = spec.extent(t);
    polar_integral(|x, y| Ok(eval_solution(spec, t, x, y)?.0), cx, cy, s, opts)
}
