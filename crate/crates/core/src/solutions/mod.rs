//! Closed-form rational solutions of the zero-energy equation.
//!
//! Every family is `v = -2 Laplacian log tau = -8 d_z d_zbar log tau` for a positive
//! `tau(t, x, y)`, with companion field `W = -3 dbar^{-1} d v = 24 d_z^2 log tau`.

mod blowup;
mod gh;
mod growth;
mod mass;
mod residual;

pub use blowup::{blowup_scan, min_denominator, BlowupScan};
pub use gh::{gh_eval, gh_identities_check, gh_poly, horner, Bivariate, GhIdentityReport, GhPoly, MAX_DEGREE};
pub use growth::{l2_growth, l2_norm_squared, nonzero_root, L2Growth, L2Row};
pub use mass::{mass, mass_with, MassOptions};
pub use residual::nv_residual;

use crate::error::{NvError, Result};
use crate::Complex64;

/// `4 / 3^{3/4}`: bound on `|c|` for positivity of the `Q_{2,c}` log-argument.
pub fn c0() -> f64 {
    4.0 / 3f64.powf(0.75)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSpec {
    Q1ab { a: f64, b: f64 },
    Q2c { c: f64 },
    Qn0 { n: usize },
    ScaledBy { lambda: f64, inner: Box<SolutionSpec> },
}

impl SolutionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SolutionSpec::Q1ab { a, b } => {
                if a * a + b * b >= 4.0 {
                    return Err(NvError::invalid(format!("Q1ab needs a^2 + b^2 < 4, got a={a}, b={b}")));
                }
            }
            SolutionSpec::Q2c { c } => {
                if c.abs() >= c0() {
                    return Err(NvError::invalid(format!("Q2c needs |c| < {}, got {c}", c0())));
                }
            }
            SolutionSpec::Qn0 { n } => {
                if *n < 1 || *n > MAX_DEGREE {
                    return Err(NvError::invalid(format!("Qn0 needs 1 <= n <= {MAX_DEGREE}, got {n}")));
                }
            }
            SolutionSpec::ScaledBy { lambda, inner } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(NvError::invalid(format!("scale must be positive, got {lambda}")));
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// Centre and length scale of the bulk of the solution at time `t`.
    pub fn extent(&self, t: f64) -> (f64, f64, f64) {
        match self {
            SolutionSpec::Q1ab { a, b } => (-a / 2.0, -b / 2.0, 1.0),
            SolutionSpec::Q2c { .. } => (0.0, 0.0, 1.0),
            SolutionSpec::Qn0 { n } => {
                let r = gh_poly(*n).ok().and_then(|p| growth::nonzero_root(&p, t)).map(|z| z.norm()).unwrap_or(0.0);
                (0.0, 0.0, 1.0 + r)
            }
            SolutionSpec::ScaledBy { lambda, inner } => {
                let (x, y, s) = inner.extent(lambda.powi(3) * t);
                (x / lambda, y / lambda, s / lambda)
            }
        }
    }
}

/// `tau` and its derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct TauJet {
    pub tau: f64,
    pub tau_z: Complex64,
    pub tau_zz: Complex64,
    pub tau_zzbar: f64,
    /// `tau tau_zzbar - |tau_z|^2`, formed without cancellation where the family allows.
    pub det: f64,
    pub tau_t: f64,
    pub tau_tz: Complex64,
    pub tau_tzzbar: f64,
}

fn jet_from_xy(tau: f64, (tx, ty): (f64, f64), (txx, txy, tyy): (f64, f64, f64), tau_t: f64) -> TauJet {
    let tau_z = Complex64::new(0.5 * tx, -0.5 * ty);
    let tau_zzbar = 0.25 * (txx + tyy);
    TauJet {
        tau,
        tau_z,
        tau_zz: Complex64::new(0.25 * (txx - tyy), -0.5 * txy),
        tau_zzbar,
        det: tau * tau_zzbar - tau_z.norm_sqr(),
        tau_t,
        tau_tz: Complex64::new(0.0, 0.0),
        tau_tzzbar: 0.0,
    }
}

fn tau_jet(spec: &SolutionSpec, t: f64, x: f64, y: f64) -> Result<TauJet> {
    Ok(match spec {
        SolutionSpec::Q1ab { a, b } => TauJet {
            det: 1.0 - 0.25 * (a * a + b * b),
            ..jet_from_xy(1.0 + a * x + b * y + x * x + y * y, (a + 2.0 * x, b + 2.0 * y), (2.0, 0.0, 2.0), 0.0)
        },
        SolutionSpec::Q2c { c } => {
            let r2 = x * x + y * y;
            jet_from_xy(
                1.0 - 24.0 * c * t + c * (x * x * x + y * y * y) + r2 * r2,
                (3.0 * c * x * x + 4.0 * x * r2, 3.0 * c * y * y + 4.0 * y * r2),
                (6.0 * c * x + 4.0 * r2 + 8.0 * x * x, 8.0 * x * y, 6.0 * c * y + 4.0 * r2 + 8.0 * y * y),
                -24.0 * c,
            )
        }
        SolutionSpec::Qn0 { n } => {
            let p = gh_poly(*n)?;
            let z = Complex64::new(x, y);
            let (pv, p1, p2) = horner(&p.dense(t), z);
            let (pt, pt1, _) = horner(&p.dense_dt(t), z);
            TauJet {
                tau: 1.0 + pv.norm_sqr(),
                tau_z: p1 * pv.conj(),
                tau_zz: p2 * pv.conj(),
                tau_zzbar: p1.norm_sqr(),
                det: p1.norm_sqr(),
                tau_t: 2.0 * (pt * pv.conj()).re,
                tau_tz: pt1 * pv.conj() + p1 * pt.conj(),
                tau_tzzbar: 2.0 * (pt1 * p1.conj()).re,
            }
        }
        SolutionSpec::ScaledBy { .. } => unreachable!("scaling is unwrapped by the caller"),
    })
}

/// Unwraps nested scalings: returns the base spec and the map `(t, x, y) -> inner coordinates`.
fn unwrap_scaling(spec: &SolutionSpec) -> (&SolutionSpec, f64) {
    let mut s = spec;
    let mut lam = 1.0;
    while let SolutionSpec::ScaledBy { lambda, inner } = s {
        lam *= lambda;
        s = inner;
    }
    (s, lam)
}

fn checked_jet(spec: &SolutionSpec, t: f64, x: f64, y: f64) -> Result<(TauJet, f64)> {
    let (base, lam) = unwrap_scaling(spec);
    let (ti, xi, yi) = (lam.powi(3) * t, lam * x, lam * y);
    let j = tau_jet(base, ti, xi, yi)?;
    if j.tau <= 0.0 || !j.tau.is_finite() {
        return Err(NvError::BlowupReached { t, x, y, denominator: j.tau });
    }
    Ok((j, lam))
}

/// Value `v(t, x, y)` and the log-argument `tau` (the blow-up monitor).
pub fn eval_solution(spec: &SolutionSpec, t: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    let (j, lam) = checked_jet(spec, t, x, y)?;
    let v = -8.0 * j.det / (j.tau * j.tau);
    Ok((lam * lam * v, j.tau))
}

/// Time derivative `dv/dt` in closed form.
pub fn eval_solution_dt(spec: &SolutionSpec, t: f64, x: f64, y: f64) -> Result<f64> {
    let (j, lam) = checked_jet(spec, t, x, y)?;
    let (f, g) = (j.tau_t, j.tau);
    let vt = -8.0
        * (j.tau_tzzbar / g - 2.0 * (j.tau_tz * j.tau_z.conj()).re / (g * g) - f * j.tau_zzbar / (g * g)
            + 2.0 * f * j.tau_z.norm_sqr() / (g * g * g));
    Ok(lam.powi(5) * vt)
}

/// Companion field `W = -3 dbar^{-1} d v = 24 d_z^2 log tau`; `(Re W, Im W)` is the vector field.
pub fn w_field(spec: &SolutionSpec, t: f64, x: f64, y: f64) -> Result<Complex64> {
    let (j, lam) = checked_jet(spec, t, x, y)?;
    let w = 24.0 * (j.tau_zz * j.tau - j.tau_z * j.tau_z) / (j.tau * j.tau);
    Ok(lam * lam * w)
}

/// The expanded closed form of `Q_{2,c}`.
pub fn q2c_expanded(c: f64, t: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let d = 1.0 + r2 * r2 + c * (-24.0 * t + x * x * x + y * y * y);
    let d2 = d * d;
    let (x2, y2) = (x * x, y * y);
    let (x3, y3) = (x2 * x, y2 * y);
    let (x4, y4) = (x2 * x2, y2 * y2);
    let n1 = -32.0 * r2;
    let n2 = x * (-3.0 + 192.0 * t * x + x4)
        - 3.0 * (1.0 + x4) * y
        - 2.0 * (-96.0 * t + x3) * y2
        - 2.0 * x2 * y3
        - 3.0 * x * y4
        + y4 * y;
    let n3 = x4 - 2.0 * x3 * y - 2.0 * x * y3 + y4 + 48.0 * t * (x + y);
    (n1 + 4.0 * c * n2 + 6.0 * c * c * n3) / d2
}

/// `W_n` from the displayed rational expression in `P_n, P_n', P_n''`.
pub fn wn_closed_form(n: usize, t: f64, z: Complex64) -> Result<Complex64> {
    let p = gh_poly(n)?;
    let (pv, p1, p2) = horner(&p.dense(t), z);
    let q = 1.0 + pv.norm_sqr();
    Ok(24.0 * pv.conj() * (p2 * q - p1 * p1 * pv.conj()) / (q * q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c0_value() {
        assert!((c0() - 1.7547654).abs() < 1e-6);
    }

    #[test]
    fn basic_values() {
        let (v, _) = eval_solution(&SolutionSpec::Q2c { c: 0.0 }, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(v, 0.0);
        let (v, d) = eval_solution(&SolutionSpec::Q1ab { a: 0.0, b: 0.0 }, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(v, -8.0);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn q1ab_formula() {
        let (a, b) = (0.7, -1.1);
        for &(x, y) in &[(0.3, 0.2), (-1.5, 2.0), (4.0, -3.0)] {
            let (v, _) = eval_solution(&SolutionSpec::Q1ab { a, b }, 0.0, x, y).unwrap();
            let d: f64 = 1.0 + a * x + b * y + x * x + y * y;
            let e = -2.0 * (4.0 - a * a - b * b) / (d * d);
            assert!((v - e).abs() < 1e-13 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn q2c_expanded_matches_log_form() {
        for &c in &[-0.5, 0.3, 1.2] {
            for &(t, x, y) in &[(0.0, 0.4, -0.3), (0.01, 1.3, 0.7), (0.02, -2.0, 1.5)] {
                let (v, _) = eval_solution(&SolutionSpec::Q2c { c }, t, x, y).unwrap();
                let e = q2c_expanded(c, t, x, y);
                assert!((v - e).abs() < 1e-12 * (1.0 + e.abs()), "c={c} {v} {e}");
            }
        }
    }

    #[test]
    fn qn0_matches_modulus_form() {
        let p = gh_poly(4).unwrap();
        let z = Complex64::new(0.6, -0.9);
        let t = 0.02;
        let (pv, p1, _) = horner(&p.dense(t), z);
        let e = -8.0 * p1.norm_sqr() / (1.0 + pv.norm_sqr()).powi(2);
        let (v, _) = eval_solution(&SolutionSpec::Qn0 { n: 4 }, t, z.re, z.im).unwrap();
        assert!((v - e).abs() < 1e-13);
        let w = w_field(&SolutionSpec::Qn0 { n: 4 }, t, z.re, z.im).unwrap();
        let wc = wn_closed_form(4, t, z).unwrap();
        assert!((w - wc).norm() < 1e-12 * (1.0 + wc.norm()));
    }

    #[test]
    fn time_derivative_matches_difference_quotient() {
        let specs = [
            SolutionSpec::Q2c { c: 0.5 },
            SolutionSpec::Qn0 { n: 3 },
            SolutionSpec::ScaledBy { lambda: 2.0, inner: Box::new(SolutionSpec::Qn0 { n: 4 }) },
        ];
        for s in &specs {
            let (t, x, y) = (0.02, 0.8, -0.4);
            let h = 1e-5;
            let fd = (eval_solution(s, t + h, x, y).unwrap().0 - eval_solution(s, t - h, x, y).unwrap().0) / (2.0 * h);
            let an = eval_solution_dt(s, t, x, y).unwrap();
            assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{s:?}: {fd} vs {an}");
        }
    }

    #[test]
    fn blowup_reported() {
        // c = 1: the log-argument first vanishes near t = 0.0373; by t = 0.05 it is negative here
        let r = eval_solution(&SolutionSpec::Q2c { c: 1.0 }, 0.05, -0.375, -0.375);
        assert!(matches!(r, Err(NvError::BlowupReached { .. })));
    }

    #[test]
    fn validation() {
        assert!(SolutionSpec::Q1ab { a: 2.0, b: 0.0 }.validate().is_err());
        assert!(SolutionSpec::Q2c { c: 1.8 }.validate().is_err());
        assert!(SolutionSpec::Q2c { c: 1.5 }.validate().is_ok());
        assert!(SolutionSpec::Qn0 { n: 0 }.validate().is_err());
    }
}
