//! Least-squares log-log slope fits.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Slope of `y` against `x` with the half-width of its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> SlopeFit {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 2, "need at least two samples");
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ci = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let q = StudentsT::new(0.0, 1.0, nf - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(1.96);
        q * se
    } else {
        f64::NAN
    };
    SlopeFit { slope, intercept, ci }
}

/// Fits `log y = a + slope * log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> SlopeFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// `n` logarithmically spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Nelder-Mead minimisation in two variables. Returns the best point and value.
pub fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: f64, tol: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut s = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut fs = [f(s[0]), f(s[1]), f(s[2])];
    let lerp = |a: [f64; 2], b: [f64; 2], k: f64| [a[0] + k * (b[0] - a[0]), a[1] + k * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        s = [s[idx[0]], s[idx[1]], s[idx[2]]];
        fs = [fs[idx[0]], fs[idx[1]], fs[idx[2]]];
        let size = (s[1][0] - s[0][0])
            .abs()
            .max((s[1][1] - s[0][1]).abs())
            .max((s[2][0] - s[0][0]).abs())
            .max((s[2][1] - s[0][1]).abs());
        if size < tol {
            break;
        }
        let c = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        let xr = lerp(c, s[2], -1.0);
        let fr = f(xr);
        if fr < fs[0] {
            let xe = lerp(c, s[2], -2.0);
            let fe = f(xe);
            if fe < fr {
                s[2] = xe;
                fs[2] = fe;
            } else {
                s[2] = xr;
                fs[2] = fr;
            }
        } else if fr < fs[1] {
            s[2] = xr;
            fs[2] = fr;
        } else {
            let xc = if fr < fs[2] { lerp(c, s[2], -0.5) } else { lerp(c, s[2], 0.5) };
            let fc = f(xc);
            if fc < fs[2].min(fr) {
                s[2] = xc;
                fs[2] = fc;
            } else {
                for k in 1..3 {
                    s[k] = lerp(s[0], s[k], 0.5);
                    fs[k] = f(s[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| fs[a].total_cmp(&fs[b])).unwrap_or(0);
    (s[best], fs[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = log_grid(1.0, 100.0, 9);
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t.powf(-0.75)).collect();
        let f = loglog_fit(&x, &y);
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!(f.ci < 1e-10);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(10.0, 1000.0, 12);
        assert!((g[0] - 10.0).abs() < 1e-12);
        assert!((g[11] - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, fx) = nelder_mead(|p| (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 0.5).powi(2), [0.0, 0.0], 0.5, 1e-10, 500);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] + 0.5).abs() < 1e-6);
        assert!(fx < 1e-10);
    }
}
