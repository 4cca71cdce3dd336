//! Gould-Hopper polynomials `P_n(t, z) = n! sum_k (8t)^k z^{n-3k} / (k! (n-3k)!)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{NvError, Result};
use crate::Complex64;

/// Largest degree accepted by [`gh_poly`].
pub const MAX_DEGREE: usize = 25;

/// Exact coefficients: `coeffs[k]` multiplies `z^{n-3k} t^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GhPoly {
    pub n: usize,
    pub coeffs: Vec<i128>,
}

fn factorial(n: usize) -> Option<i128> {
    (1..=n as i128).try_fold(1i128, |acc, k| acc.checked_mul(k))
}

pub fn gh_poly(n: usize) -> Result<GhPoly> {
    if n > MAX_DEGREE {
        return Err(NvError::Overflow { n });
    }
    let of = || NvError::Overflow { n };
    let nf = factorial(n).ok_or_else(of)?;
    let mut coeffs = Vec::with_capacity(n / 3 + 1);
    for k in 0..=n / 3 {
        let den = factorial(k).and_then(|a| factorial(n - 3 * k).and_then(|b| a.checked_mul(b))).ok_or_else(of)?;
        let p8 = 8i128.checked_pow(k as u32).ok_or_else(of)?;
        let c = (nf / den).checked_mul(p8).ok_or_else(of)?;
        debug_assert_eq!(nf % den, 0);
        coeffs.push(c);
    }
    Ok(GhPoly { n, coeffs })
}

impl GhPoly {
    /// Dense coefficients in `z` at time `t`, lowest power first.
    pub fn dense(&self, t: f64) -> Vec<f64> {
        let mut a = vec![0.0; self.n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            a[self.n - 3 * k] = c as f64 * t.powi(k as i32);
        }
        a
    }

    /// Dense coefficients of `dP/dt` in `z`.
    pub fn dense_dt(&self, t: f64) -> Vec<f64> {
        let mut a = vec![0.0; self.n + 1];
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            a[self.n - 3 * k] = c as f64 * k as f64 * t.powi(k as i32 - 1);
        }
        a
    }

    /// As an exact bivariate polynomial.
    pub fn to_bivariate(&self) -> Bivariate {
        let mut b = Bivariate::default();
        for (k, &c) in self.coeffs.iter().enumerate() {
            b.add(k as u32, (self.n - 3 * k) as u32, c);
        }
        b
    }
}

/// Horner evaluation of `P_n(t, z)`.
pub fn gh_eval(p: &GhPoly, t: f64, z: Complex64) -> Complex64 {
    horner(&p.dense(t), z).0
}

/// Value and first two derivatives of a real-coefficient polynomial (lowest power first).
pub fn horner(a: &[f64], z: Complex64) -> (Complex64, Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let (mut p, mut d1, mut d2) = (zero, zero, zero);
    for &c in a.iter().rev() {
        d2 = d2 * z + 2.0 * d1;
        d1 = d1 * z + p;
        p = p * z + c;
    }
    (p, d1, d2)
}

/// Polynomial in `(t, z)` with exact integer coefficients keyed by `(t power, z power)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bivariate {
    pub terms: BTreeMap<(u32, u32), i128>,
}

impl Bivariate {
    pub fn add(&mut self, tp: u32, zp: u32, c: i128) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry((tp, zp)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&(tp, zp));
        }
    }

    pub fn d_z(&self) -> Bivariate {
        let mut out = Bivariate::default();
        for (&(tp, zp), &c) in &self.terms {
            if zp > 0 {
                out.add(tp, zp - 1, c * zp as i128);
            }
        }
        out
    }

    pub fn d_t(&self) -> Bivariate {
        let mut out = Bivariate::default();
        for (&(tp, zp), &c) in &self.terms {
            if tp > 0 {
                out.add(tp - 1, zp, c * tp as i128);
            }
        }
        out
    }

    /// Multiplies by `c t^tp z^zp`.
    pub fn mul_monomial(&self, c: i128, tp: u32, zp: u32) -> Bivariate {
        let mut out = Bivariate::default();
        for (&(a, b), &v) in &self.terms {
            out.add(a + tp, b + zp, v * c);
        }
        out
    }

    pub fn plus(&self, other: &Bivariate) -> Bivariate {
        let mut out = self.clone();
        for (&(a, b), &v) in &other.terms {
            out.add(a, b, v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GhIdentityReport {
    pub n_max: usize,
    /// Degrees at which `(z + 24 t d_z^2) P_{n-1} = P_n` failed.
    pub recurrence_failures: Vec<usize>,
    /// Degrees at which `d_z P_n = n P_{n-1}` failed.
    pub derivative_failures: Vec<usize>,
    /// Degrees at which `d_t P_n = 8 d_z^3 P_n` failed.
    pub airy_failures: Vec<usize>,
}

impl GhIdentityReport {
    pub fn all_hold(&self) -> bool {
        self.recurrence_failures.is_empty() && self.derivative_failures.is_empty() && self.airy_failures.is_empty()
    }
}

/// Checks the three identities as exact coefficient equalities for `n = 1..=n_max`.
pub fn gh_identities_check(n_max: usize) -> Result<GhIdentityReport> {
    if n_max < 3 {
        return Err(NvError::invalid("n_max must be at least 3"));
    }
    let mut rep =
        GhIdentityReport { n_max, recurrence_failures: vec![], derivative_failures: vec![], airy_failures: vec![] };
    let mut prev = gh_poly(0)?.to_bivariate();
    for n in 1..=n_max {
        let p = gh_poly(n)?.to_bivariate();
        let rec = prev.mul_monomial(1, 0, 1).plus(&prev.d_z().d_z().mul_monomial(24, 1, 0));
        if rec != p {
            rep.recurrence_failures.push(n);
        }
        if p.d_z() != prev.mul_monomial(n as i128, 0, 0) {
            rep.derivative_failures.push(n);
        }
        if p.d_t() != p.d_z().d_z().d_z().mul_monomial(8, 0, 0) {
            rep.airy_failures.push(n);
        }
        prev = p;
    }
    Ok(rep)
}
