//! Acceptance suite. One PASS/FAIL line per criterion; exits non-zero if any fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nvlab::fit::log_grid;
use nvlab::oscillatory::{
    decay_scan, fit_decay, fit_decay_worst_case, scaling_identity_check, BumpProfile, IntegralSpec, Region, UGrid,
};
use nvlab::solutions::{blowup_scan, eval_solution, gh_identities_check, l2_growth, mass, q2c_expanded, SolutionSpec};
use nvlab::solver::{dt_max, evolve, DealiasRule, FieldState, Simulation, StepperConfig};
use nvlab::stationary::{cubic_residual, omega_distances, roots_zeta, stationary_set, CaseTag};
use nvlab::symbol::{resonance_h, resonance_h_gradient};
use nvlab::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances.
const MASS_REL: f64 = 2e-3;
const CUBIC_RES: f64 = 1e-10;
const PRODUCT_TOL: f64 = 1e-10;
const VERTEX_TOL: f64 = 1e-6;
const DECAY_SLOPE: f64 = -0.70;
const LARGE_FREQ_SLOPE: f64 = -0.85;
const SMALL_T_BAND: f64 = 0.15;
const SCALING_REL: f64 = 1e-2;
const STATIONARY_DRIFT: f64 = 1e-4;
const Q2C_REL: f64 = 1e-2;
const MASS_DRIFT: f64 = 1e-6;
const CONV_ORDER: f64 = 3.5;
const ISOMETRY: f64 = 1e-10;
const GROWTH_SLOPE: f64 = 1.0 / 3.0;
const GRADIENT_REL: f64 = 1e-6;

// Sampling choices.
const DECAY_T_POINTS: usize = 25;
const LARGE_FREQ_T_POINTS: usize = 12;
const SMALL_T_ENERGY: f64 = 1e-3;
const STATIONARY_SAMPLES: usize = 10_000;
const SAMPLE_RADIUS: f64 = 36.0;

type Check = Result<(bool, String)>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s)
}

fn gh_algebra() -> Check {
    let r = gh_identities_check(20)?;
    Ok((
        r.all_hold(),
        format!(
            "n=1..20 failures rec={:?} dz={:?} airy={:?}",
            r.recurrence_failures, r.derivative_failures, r.airy_failures
        ),
    ))
}

fn masses() -> Check {
    let mut cases = vec![
        ("Q1,0", SolutionSpec::Q1ab { a: 0.0, b: 0.0 }, -8.0 * PI),
        ("Q2,0", SolutionSpec::Q2c { c: 0.0 }, -16.0 * PI),
    ];
    for n in 1..=5 {
        cases.push(("Qn,0", SolutionSpec::Qn0 { n }, -8.0 * n as f64 * PI));
    }
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, spec, expect) in &cases {
        let m = mass(spec, 0.0)?;
        let rel = (m - expect).abs() / expect.abs();
        worst = worst.max(rel);
        if let SolutionSpec::Qn0 { n } = spec {
            detail.push(format!("{name}(n={n}) {rel:.1e}"));
        } else {
            detail.push(format!("{name} {rel:.1e}"));
        }
    }
    Ok((worst < MASS_REL, format!("worst rel err {worst:.2e}; {}", detail.join(", "))))
}

/// Brute force over all index pairs in lexicographic order, strict improvement only.
fn omega_oracle(l: &[Complex64; 6]) -> (f64, (usize, usize), f64, (usize, usize)) {
    let pairs: Vec<(usize, usize)> = (0..6).flat_map(|i| ((i + 1)..6).map(move |j| (i, j))).collect();
    let min_over = |skip: &[(usize, usize)]| {
        let mut best = (f64::INFINITY, (0, 0));
        for &(i, j) in &pairs {
            if skip.contains(&(i, j)) {
                continue;
            }
            let d = (l[i] - l[j]).norm();
            if d < best.0 {
                best = (d, (i, j));
            }
        }
        best
    };
    let (w1, p1) = min_over(&[(2, 5)]);
    let (a, b) = ((p1.0 + 3) % 6, (p1.1 + 3) % 6);
    let (w2, p2) = min_over(&[(2, 5), p1, (a.min(b), a.max(b))]);
    (w1, p1, w2, p2)
}

fn stationary_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let (mut max_res, mut max_prod) = (0.0f64, 0.0f64);
    let (mut order_bad, mut oracle_bad) = (0usize, 0usize);
    for _ in 0..STATIONARY_SAMPLES {
        let r = SAMPLE_RADIUS * rng.gen::<f64>().sqrt();
        let u = Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>());
        for z in roots_zeta(u) {
            max_res = max_res.max(cubic_residual(u, z));
        }
        let s = stationary_set(u);
        max_prod = max_prod.max((s.lambdas[0] * s.lambdas[1] * s.lambdas[2] - 1.0).norm());
        if !(s.omega1 <= s.omega2 && s.omega2 < 2.0) {
            order_bad += 1;
        }
        let d = omega_distances(&s.lambdas);
        let (w1, p1, w2, p2) = omega_oracle(&s.lambdas);
        if d.omega1 != w1 || d.omega2 != w2 || d.pair1 != p1 || d.pair2 != p2 {
            oracle_bad += 1;
        }
    }
    let mut vertex_err: f64 = 0.0;
    let mut vertex_case = true;
    for k in 0..3 {
        let u = Complex64::from_polar(18.0, 2.0 * PI * k as f64 / 3.0);
        let s = stationary_set(u);
        vertex_case &= s.case_tag == CaseTag::TripleDegenerate;
        let target = Complex64::from_polar(1.0, -PI * k as f64 / 3.0);
        let e = s.lambdas.iter().map(|l| (l - target).norm()).fold(f64::INFINITY, f64::min);
        vertex_err = vertex_err.max(e);
    }
    let pass = max_res < CUBIC_RES
        && max_prod < PRODUCT_TOL
        && order_bad == 0
        && oracle_bad == 0
        && vertex_case
        && vertex_err < VERTEX_TOL;
    Ok((
        pass,
        format!(
            "{STATIONARY_SAMPLES} samples: residual {max_res:.1e}, |l0 l1 l2 - 1| {max_prod:.1e}, order violations {order_bad}, oracle mismatches {oracle_bad}; vertices case 1 {vertex_case}, lambda err {vertex_err:.1e}"
        ),
    ))
}

fn dispersive_decay() -> Check {
    let spec = IntegralSpec::new(0.25, 1.0, c(0.0, 0.0), 10.0, Region::Full);
    let scan = fit_decay_worst_case(&spec, &log_grid(10.0, 1000.0, DECAY_T_POINTS))?;
    let w = &scan.probes[scan.worst];
    let pass = scan.probes.iter().all(|p| p.slope <= DECAY_SLOPE);
    Ok((
        pass,
        format!(
            "{} grid points, {DECAY_T_POINTS} times; worst slope {:.3} (ci {:.3}) at u=({:.3},{:.3})",
            scan.probes.len(),
            w.slope,
            w.slope_ci,
            w.spec.u.re,
            w.spec.u.im
        ),
    ))
}

fn large_frequency_decay() -> Check {
    let region = Region::LargeFreq { cutoff_r: 3.0, profile: BumpProfile::Exp };
    let grid = log_grid(10.0, 1000.0, LARGE_FREQ_T_POINTS);
    let mut pass = true;
    let mut detail = Vec::new();
    for u in [0.0, 18.0] {
        let p = fit_decay(&IntegralSpec::new(0.5, 1.0, c(u, 0.0), 10.0, region), &grid)?;
        pass &= p.slope <= LARGE_FREQ_SLOPE;
        detail.push(format!("u={u}: slope {:.3}", p.slope));
    }
    Ok((pass, detail.join(", ")))
}

fn small_t_growth() -> Check {
    let grid = log_grid(0.01, 0.3, 8);
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.0, 0.25] {
        let spec = IntegralSpec::new(alpha, SMALL_T_ENERGY, c(0.0, 0.0), 0.01, Region::OutsideB2);
        let scan = decay_scan(&spec, &grid, &UGrid::Single(c(0.0, 0.0)))?;
        let slope = scan.probes[0].slope;
        let target = -(alpha + 2.0) / 3.0;
        pass &= (slope - target).abs() <= SMALL_T_BAND;
        detail.push(format!("alpha={alpha}: slope {slope:.4} vs {target:.4}"));
    }
    Ok((pass, format!("I_out, E={SMALL_T_ENERGY}, t in [0.01, 0.3]; {}", detail.join(", "))))
}

fn scaling_identity() -> Check {
    let mut worst: f64 = 0.0;
    for (e, t, u, a) in [(4.0, 10.0, 0.0, 0.0), (0.25, 40.0, 2.0, 0.25)] {
        worst = worst.max(scaling_identity_check(t, c(u, 0.0), e, a)?);
    }
    Ok((worst < SCALING_REL, format!("worst rel err {worst:.2e}")))
}

fn sample(spec: &SolutionSpec, n: usize, l: f64, t: f64) -> Result<FieldState> {
    let mut err = None;
    let s = FieldState::from_fn(n, l, 0.0, |x, y| match eval_solution(spec, t, x, y) {
        Ok((v, _)) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(s),
    }
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn smooth_data(rng: &mut ChaCha8Rng, n: usize, l: f64, e: f64, amp: f64) -> Result<FieldState> {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), amp * rng.gen_range(0.2..1.0), rng.gen_range(0.8..1.5))
        })
        .collect();
    FieldState::from_fn(n, l, e, |x, y| {
        bumps.iter().map(|(x0, y0, a, w)| a * (-((x - x0).powi(2) + (y - y0).powi(2)) / (w * w)).exp()).sum()
    })
}

fn solver_validation() -> Check {
    let mut parts = Vec::new();
    let mut pass = true;

    // (a) the lump stays put; a box of side 40
    let (n, l) = (256, 20.0);
    let q1 = SolutionSpec::Q1ab { a: 0.0, b: 0.0 };
    let v0 = sample(&q1, n, l, 0.0)?;
    let dt = (0.5 * dt_max(n, l, 0.0, DealiasRule::TwoThirds)).min(1e-3);
    let mut drift: f64 = 0.0;
    let mut sim = Simulation::new(&v0, StepperConfig::new(0.1 / (0.1 / dt).ceil()))?;
    while sim.time() < 0.1 - 1e-12 {
        sim.step()?;
        drift = drift.max(rel_l2(&sim.values(), &v0.values));
    }
    pass &= drift < STATIONARY_DRIFT;
    parts.push(format!("(a) drift {drift:.1e}"));

    // (b) Q2,c against its closed form
    let cq = -0.5;
    let q2 = SolutionSpec::Q2c { c: cq };
    let v0 = sample(&q2, n, l, 0.0)?;
    let grid = v0.grid();
    let mut sim = Simulation::new(&v0, StepperConfig::new(0.05 / (0.05 / dt).ceil()))?;
    let mut q2err: f64 = 0.0;
    while sim.time() < 0.05 - 1e-12 {
        sim.step()?;
        let t = sim.time();
        let exact = grid.sample(|x, y| q2c_expanded(cq, t, x, y));
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let e = sim.values().iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        q2err = q2err.max(e / scale);
    }
    pass &= q2err < Q2C_REL;
    parts.push(format!("(b) max rel err {q2err:.1e}"));

    // (c) mass over 100 steps, several energies
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mdrift: f64 = 0.0;
    for e in [0.0, 1.0, 4.0] {
        let s = smooth_data(&mut rng, 64, 10.0, e, 0.3)?;
        let cfg = StepperConfig::new(0.4 * dt_max(64, 10.0, e, DealiasRule::TwoThirds));
        let tr = evolve(&s, &cfg, 100.0 * cfg.dt, |_| {})?;
        let m0 = tr.observations[0].mass;
        for o in &tr.observations {
            mdrift = mdrift.max((o.mass - m0).abs() / m0.abs());
        }
    }
    pass &= mdrift < MASS_DRIFT;
    parts.push(format!("(c) mass drift {mdrift:.1e}"));

    // (d) Richardson self-convergence
    let s = smooth_data(&mut rng, 64, 10.0, 1.0, 1.0)?;
    let dt0 = 0.4 * dt_max(64, 10.0, 1.0, DealiasRule::TwoThirds);
    let t_end = 16.0 * dt0;
    let run = |dt: f64| evolve(&s, &StepperConfig::new(dt), t_end, |_| {}).map(|tr| tr.final_state.values);
    let (a, b, cc) = (run(dt0)?, run(dt0 / 2.0)?, run(dt0 / 4.0)?);
    let d1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let d2: f64 = b.iter().zip(&cc).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let order = (d1 / d2).log2();
    pass &= order >= CONV_ORDER;
    parts.push(format!("(d) order {order:.2}"));

    // (e) linear propagation keeps the l2 norm
    let s = smooth_data(&mut rng, 64, 10.0, 1.0, 1.0)?;
    let mut cfg = StepperConfig::new(0.4 * dt_max(64, 10.0, 1.0, DealiasRule::TwoThirds));
    cfg.nonlinear = false;
    let tr = evolve(&s, &cfg, 200.0 * cfg.dt, |_| {})?;
    let n0 = tr.observations[0].l2;
    let iso = tr.observations.iter().map(|o| (o.l2 - n0).abs() / n0).fold(0.0, f64::max);
    pass &= iso < ISOMETRY;
    parts.push(format!("(e) isometry {iso:.1e}"));

    Ok((pass, parts.join(", ")))
}

fn blowup_and_growth() -> Check {
    let grid: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.1).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for cq in [0.5, 1.0, 1.5] {
        let s = blowup_scan(cq, &grid)?;
        pass &= s.t_star.is_some();
        parts.push(format!("c={cq}: t*={}", s.t_star.map_or("none".into(), |t| format!("{t:.4}"))));
    }
    for cq in [-0.5, 0.0] {
        let s = blowup_scan(cq, &grid)?;
        pass &= s.t_star.is_none();
        parts.push(format!("c={cq}: {}", if s.t_star.is_none() { "none" } else { "crossing" }));
    }
    let dyadic: Vec<f64> = (0..=6).map(|k| 2f64.powi(k)).collect();
    for n in [3, 4] {
        let g = l2_growth(n, &dyadic)?;
        pass &= g.monotone && g.fit.slope >= GROWTH_SLOPE;
        parts.push(format!("n={n}: monotone {} slope {:.3}", g.monotone, g.fit.slope));
    }
    Ok((pass, parts.join(", ")))
}

fn resonance_gradients() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for e in [0.5, 1.0, 2.0] {
        let mut k = 0;
        while k < 100 {
            let xi = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let xt = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if xi.norm() < 0.2 || (xt - xi).norm() < 0.2 {
                continue;
            }
            k += 1;
            let (g1, g2) = resonance_h_gradient(xi, xt, e)?;
            // fourth-order central differences
            let h = 1e-4;
            let fd = |d: Complex64| {
                let f = |s: f64| resonance_h(xi + d * s, xt, e);
                (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
            };
            let (f1, f2) = (fd(c(1.0, 0.0)), fd(c(0.0, 1.0)));
            let rel = ((g1 - f1).hypot(g2 - f2)) / g1.hypot(g2).max(1.0);
            worst = worst.max(rel);
        }
    }
    Ok((worst < GRADIENT_REL, format!("300 points, worst rel err {worst:.1e}")))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Gould-Hopper identities", limit: secs(1.0), run: gh_algebra },
        Criterion { id: 2, name: "lump masses", limit: secs(30.0), run: masses },
        Criterion { id: 3, name: "stationary-point suite", limit: secs(10.0), run: stationary_suite },
        Criterion { id: 4, name: "dispersive decay", limit: secs(600.0), run: dispersive_decay },
        Criterion { id: 5, name: "large-frequency decay", limit: secs(300.0), run: large_frequency_decay },
        Criterion { id: 6, name: "small-t growth", limit: secs(120.0), run: small_t_growth },
        Criterion { id: 7, name: "energy scaling identity", limit: secs(120.0), run: scaling_identity },
        Criterion { id: 8, name: "solver validation", limit: secs(300.0), run: solver_validation },
        Criterion { id: 9, name: "blow-up and L2 growth", limit: secs(300.0), run: blowup_and_growth },
        Criterion { id: 10, name: "resonance gradients", limit: secs(1.0), run: resonance_gradients },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for cr in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let out = (cr.run)();
        let el = start.elapsed();
        let (ok, detail) = match out {
            Ok((ok, d)) => (ok, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = el <= cr.limit;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {}: {} ({:.2} s, limit {} s{})",
            if pass { "PASS" } else { "FAIL" },
            cr.id,
            cr.name,
            detail,
            el.as_secs_f64(),
            cr.limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
