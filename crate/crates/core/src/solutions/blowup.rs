//! Finite-time blow-up search for `Q_{2,c}`.

use serde::Serialize;

use crate::error::{NvError, Result};
use crate::fit::nelder_mead;

use super::c0;

#[derive(Debug, Clone, Serialize)]
pub struct BlowupScan {
    pub c: f64,
    /// `(t, min over (x, y) of the log-argument)` on the requested grid.
    pub rows: Vec<(f64, f64)>,
    /// Grid interval containing the first sign change.
    pub bracket: Option<(f64, f64)>,
    /// Crossing time refined by bisection inside the bracket.
    pub t_star: Option<f64>,
    /// Location of the minimum at the crossing.
    pub location: Option<(f64, f64)>,
}

fn denominator(c: f64, t: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    1.0 - 24.0 * c * t + c * (x * x * x + y * y * y) + r2 * r2
}

/// Minimum of `1 - 24ct + c(x^3 + y^3) + (x^2 + y^2)^2` over the plane: 64x64 grid on `[-3, 3]^2`
/// followed by Nelder-Mead from the best grid point.
pub fn min_denominator(c: f64, t: f64) -> (f64, f64, f64) {
    let m = 64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for j in 0..m {
        let y = -3.0 + 6.0 * j as f64 / (m - 1) as f64;
        for i in 0..m {
            let x = -3.0 + 6.0 * i as f64 / (m - 1) as f64;
            let d = denominator(c, t, x, y);
            if d < best.0 {
                best = (d, x, y);
            }
        }
    }
    let (p, v) = nelder_mead(|p| denominator(c, t, p[0], p[1]), [best.1, best.2], 0.1, 1e-12, 2000);
    if v < best.0 {
        (v, p[0], p[1])
    } else {
        best
    }
}

/// Scans `t_grid` (ascending) for the first time the minimum log-argument is `<= 0`.
pub fn blowup_scan(c: f64, t_grid: &[f64]) -> Result<BlowupScan> {
    if !(c.abs() < c0()) {
        return Err(NvError::invalid(format!("need |c| < c0, got {c}")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NvError::invalid("t grid must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut bracket = None;
    for (k, &t) in t_grid.iter().enumerate() {
        let (d, _, _) = min_denominator(c, t);
        rows.push((t, d));
        if bracket.is_none() && d <= 0.0 {
            bracket = Some(if k == 0 { (t, t) } else { (t_grid[k - 1], t) });
        }
    }
    let mut t_star = None;
    let mut location = None;
    if let Some((mut lo, mut hi)) = bracket {
        for _ in 0..100 {
            if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if min_denominator(c, mid).0 <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (_, x, y) = min_denominator(c, hi);
        t_star = Some(hi);
        location = Some((x, y));
    }
    Ok(BlowupScan { c, rows, bracket, t_star, location })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..64).map(|k| 100.0 * k as f64 / 63.0).collect()
    }

    #[test]
    fn positive_c_blows_up() {
        let s = blowup_scan(1.0, &grid()).unwrap();
        assert!(s.rows[0].1 > 0.0);
        // cos^3 + sin^3 is smallest on the negative axes, giving min_r 1 - r^3 + r^4 = 1 - 27/256
        let d0 = 1.0 - 27.0 / 256.0;
        assert!((s.rows[0].1 - d0).abs() < 1e-9);
        let ts = s.t_star.unwrap();
        assert!((ts - d0 / 24.0).abs() < 1e-9, "{ts}");
    }

    #[test]
    fn negative_and_zero_c_do_not() {
        assert!(blowup_scan(-1.0, &grid()).unwrap().bracket.is_none());
        let s = blowup_scan(0.0, &grid()).unwrap();
        assert!(s.bracket.is_none());
        assert!(s.rows.iter().all(|r| r.1 >= 1.0 - 1e-12));
    }
}
