//! Linear symbol, phase, nonlocal multiplier and resonance function.

use crate::error::{NvError, Result};
use crate::spectral::Grid;
use crate::{Complex64, ComplexPoint};

/// The rational symbol `w(xi; E) = 2 (xi1^3 - 3 xi1 xi2^2) (1 - 3E / |xi|^2)`.
///
/// The origin is a removable point and returns 0.
pub fn eval_symbol(xi: ComplexPoint, energy: f64) -> f64 {
    let (x, y) = (xi.re, xi.im);
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return 0.0;
    }
    2.0 * (x * x * x - 3.0 * x * y * y) * (1.0 - 3.0 * energy / r2)
}

/// The phase `S(u, xi) = w(xi; E) + Re(conj(u) xi)`.
pub fn eval_phase(u: ComplexPoint, xi: ComplexPoint, energy: f64) -> f64 {
    eval_symbol(xi, energy) + u.re * xi.re + u.im * xi.im
}

/// Gradient of the phase written as the complex number `dS/dxi1 + i dS/dxi2`.
pub fn phase_gradient(u: ComplexPoint, xi: ComplexPoint, energy: f64) -> Complex64 {
    if xi.norm_sqr() == 0.0 {
        return u;
    }
    let xb = xi.conj();
    6.0 * xb * xb - 12.0 * energy * xb / xi + 6.0 * energy * xi * xi / (xb * xb) + u
}

/// Wirtinger derivatives `(dG/dxi, dG/dxibar)` of [`phase_gradient`].
///
/// The real Hessian has singular values `|a| + |b|` and `||a| - |b||`.
pub fn phase_hessian(xi: ComplexPoint, energy: f64) -> (Complex64, Complex64) {
    let xb = xi.conj();
    let a = 12.0 * energy * (xb / (xi * xi) + xi / (xb * xb));
    let b = 12.0 * xb - 12.0 * energy / xi - 12.0 * energy * xi * xi / (xb * xb * xb);
    (a, b)
}

/// Multiplier of `dbar^{-1} d` at the wavevector `(k1, k2)`: `(k1 - i k2) / (k1 + i k2)`.
pub fn dbar_inv_dz_multiplier(k1: f64, k2: f64) -> Complex64 {
    if k1 == 0.0 && k2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let z = Complex64::new(k1, -k2);
    z / z.conj()
}

/// Applies `dbar^{-1} d` in place to a row-major `N x N` array of Fourier coefficients.
///
/// The zero mode is set to 0.
pub fn apply_dbar_inv_dz(field_hat: &mut [Complex64], grid: &Grid) {
    let n = grid.n;
    assert_eq!(field_hat.len(), n * n, "spectral array has the wrong size");
    for (j, row) in field_hat.chunks_mut(n).enumerate() {
        let k2 = grid.wavenumber(j);
        for (i, c) in row.iter_mut().enumerate() {
            *c *= dbar_inv_dz_multiplier(grid.wavenumber(i), k2);
        }
    }
}

/// Resonance function `H[xi, xt] = w(xt) - w(xi) - w(xt - xi)`.
pub fn resonance_h(xi: ComplexPoint, xi_tilde: ComplexPoint, energy: f64) -> f64 {
    eval_symbol(xi_tilde, energy) - eval_symbol(xi, energy) - eval_symbol(xi_tilde - xi, energy)
}

/// Closed-form partials `(dH/dxi1, dH/dxi2)` with `xi_tilde` held fixed.
pub fn resonance_h_gradient(xi: ComplexPoint, xi_tilde: ComplexPoint, energy: f64) -> Result<(f64, f64)> {
    let eta = xi_tilde - xi;
    let rx = xi.norm_sqr();
    let re = eta.norm_sqr();
    if rx == 0.0 {
        return Err(NvError::Domain("resonance gradient undefined at xi = 0".into()));
    }
    if re == 0.0 {
        return Err(NvError::Domain("resonance gradient undefined at xi_tilde = xi".into()));
    }
    let e = energy;
    let (x1, x2) = (xi.re, xi.im);
    let (y1, y2) = (eta.re, eta.im);
    let fx = 1.0 - 3.0 * e / rx;
    let fy = 1.0 - 3.0 * e / re;
    let d1 = -6.0
        * ((x1 * x1 - x2 * x2) * fx - (y1 * y1 - y2 * y2) * fy
            + 2.0 * e * x1 * x1 * (x1 * x1 - 3.0 * x2 * x2) / (rx * rx)
            - 2.0 * e * y1 * y1 * (y1 * y1 - 3.0 * y2 * y2) / (re * re));
    let d2 = -12.0
        * (-x1 * x2 * fx + y1 * y2 * fy + e * x1 * x2 * (x1 * x1 - 3.0 * x2 * x2) / (rx * rx)
            - e * y1 * y2 * (y1 * y1 - 3.0 * y2 * y2) / (re * re));
    Ok((d1, d2))
}
