//! `I_in` on the torus `(phi_1, phi_2)`.
//!
//! With `xi = sqrt(E) (e^{i phi_1} + e^{i phi_2})` the integrand factors as
//! `g(phi_1 - phi_2) f(phi_1) f(phi_2)`, `f = e^{i t s(phi)}`,
//! `s(phi) = 2 E^{3/2} cos 3 phi + sqrt(E) Re(conj(u) e^{i phi})` and
//! `g(psi) = |2 cos(psi/2)|^{alpha + i beta} |sin psi|`. The tensor trapezoid rule on an
//! `N x N` grid then collapses to `(2 pi)^2 sum_m G_m F_m F_{-m}` over Fourier coefficients.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rustfft::FftPlanner;

use crate::Complex64;

type GKey = (u64, u64, usize);

static G_CACHE: Lazy<Mutex<HashMap<GKey, Arc<Vec<Complex64>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn fft_normalised(mut data: Vec<Complex64>) -> Vec<Complex64> {
    let n = data.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut data);
    let s = 1.0 / n as f64;
    data.iter_mut().for_each(|c| *c *= s);
    data
}

fn g_coeffs(alpha: f64, beta: f64, ng: usize) -> Arc<Vec<Complex64>> {
    let key = (alpha.to_bits(), beta.to_bits(), ng);
    if let Some(g) = G_CACHE.lock().expect("cache poisoned").get(&key) {
        return g.clone();
    }
    let samples: Vec<Complex64> = (0..ng)
        .map(|j| {
            let psi = 2.0 * PI * j as f64 / ng as f64;
            let c = (2.0 * (psi / 2.0).cos()).abs();
            let s = psi.sin().abs();
            if c == 0.0 || s == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(c.powf(alpha) * s, beta * c.ln())
            }
        })
        .collect();
    let g = Arc::new(fft_normalised(samples));
    G_CACHE.lock().expect("cache poisoned").insert(key, g.clone());
    g
}

/// Bandwidth-based transform size for `f`.
pub(crate) fn torus_size(t: f64, u: Complex64, energy: f64) -> usize {
    let bw = t * (6.0 * energy.powf(1.5) + energy.sqrt() * u.norm());
    ((2.0 * bw + 200.0).ceil() as usize).next_power_of_two()
}

/// `I_in` with an `n`-point rule per axis.
pub(crate) fn i_inside_torus(alpha: f64, beta: f64, energy: f64, u: Complex64, t: f64, n: usize) -> Complex64 {
    let se = energy.sqrt();
    let e32 = energy * se;
    let f: Vec<Complex64> = (0..n)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / n as f64;
            let lam = Complex64::from_polar(1.0, phi);
            let s = 2.0 * e32 * (3.0 * phi).cos() + se * (u.conj() * lam).re;
            Complex64::from_polar(1.0, t * s)
        })
        .collect();
    let f = fft_normalised(f);
    let ng = (16 * n).max(1 << 18);
    let g = g_coeffs(alpha, beta, ng);
    let half = (n / 2) as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in (1 - half)..half {
        let fm = f[m.rem_euclid(n as i64) as usize];
        let fmm = f[(-m).rem_euclid(n as i64) as usize];
        sum += g[m.rem_euclid(ng as i64) as usize] * fm * fmm;
    }
    // |xi|^{alpha + i beta} d xi = E^{1 + (alpha + i beta)/2} |lambda + lambda'|^{...} |sin| d phi
    let pref = Complex64::from_polar(energy.powf(1.0 + alpha / 2.0), beta / 2.0 * energy.ln());
    0.5 * (2.0 * PI).powi(2) * pref * sum
}
