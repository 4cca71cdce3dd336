use std::f64::consts::PI;
use std::path::Path;

use nvlab::io::{decode_snapshot, encode_snapshot, fmt_f64, parse_config};
use nvlab::oscillatory::{canonical_u, eval_i_inside, IntegralSpec, Region};
use nvlab::solutions::{eval_solution, gh_eval, gh_poly, SolutionSpec};
use nvlab::solver::{dt_max, evolve, DealiasRule, FieldState, StepperConfig};
use nvlab::stationary::{cubic_residual, in_u, roots_zeta, s_lambda, stationary_set};
use nvlab::symbol::{dbar_inv_dz_multiplier, eval_phase, eval_symbol, resonance_h};
use nvlab::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn point(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #[test]
    fn symbol_parity(xi in point(10.0), e in -4.0..4.0f64) {
        let w = eval_symbol(xi, e);
        let tol = 1e-12 * (1.0 + w.abs());
        prop_assert!((eval_symbol(-xi, e) + w).abs() <= tol);
        prop_assert!((eval_symbol(xi.conj(), e) - w).abs() <= tol);
        let rot = xi * Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        prop_assert!((eval_symbol(rot, e) - w).abs() <= 1e-10 * (1.0 + w.abs()));
    }

    #[test]
    fn phase_adds_linear_term(u in point(40.0), xi in point(5.0), e in 0.0..3.0f64) {
        let s = eval_phase(u, xi, e);
        let lin = (u.conj() * xi).re;
        prop_assert!((s - eval_symbol(xi, e) - lin).abs() <= 1e-12 * (1.0 + s.abs()));
    }

    #[test]
    fn multiplier_is_unimodular(k1 in -50.0..50.0f64, k2 in -50.0..50.0f64) {
        prop_assume!(k1 != 0.0 || k2 != 0.0);
        let m = dbar_inv_dz_multiplier(k1, k2);
        prop_assert!((m.norm() - 1.0).abs() < 1e-14);
        prop_assert!((dbar_inv_dz_multiplier(-k1, -k2) - m).norm() < 1e-14);
    }

    #[test]
    fn resonance_swaps(xi in point(4.0), xt in point(4.0), e in 0.0..2.0f64) {
        let h = resonance_h(xi, xt, e);
        prop_assert!((resonance_h(xt - xi, xt, e) - h).abs() <= 1e-10 * (1.0 + h.abs()));
    }

    #[test]
    fn canonical_u_is_invariant(u in point(40.0), k in 0..3i32, flip in any::<bool>()) {
        let mut v = u * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
        if flip {
            v = v.conj();
        }
        let a = canonical_u(u);
        prop_assert!((canonical_u(v) - a).norm() < 1e-10 * (1.0 + u.norm()));
        prop_assert!(a.arg() >= -1e-12 && a.arg() <= PI / 3.0 + 1e-12);
    }

    #[test]
    fn roots_solve_the_cubic(u in point(40.0)) {
        let roots = roots_zeta(u);
        let mut prod = c(1.0, 0.0);
        for z in roots {
            prop_assert!(cubic_residual(u, z) < 1e-10);
            prod *= z;
        }
        prop_assert!((prod - 1.0).norm() < 1e-9);
    }

    #[test]
    fn critical_points_are_stationary(u in point(40.0)) {
        let sps = stationary_set(u);
        for l in sps.lambdas {
            let scale = u.norm() * (1.0 + 1.0 / l.norm_sqr()) + 3.0 * l.norm_sqr() + 3.0 / l.norm_sqr().powi(2);
            prop_assert!(s_lambda(u, l).norm() < 1e-8 * scale, "lambda {}", l);
        }
        prop_assert!(sps.omega1 <= sps.omega2 + 1e-12);
    }

    #[test]
    fn region_contains_inner_disk(r in 0.0..60.0f64, th in 0.0..(2.0 * PI)) {
        let u = Complex64::from_polar(r, th);
        if r < 5.99 {
            prop_assert!(in_u(u));
        } else if r > 18.01 {
            prop_assert!(!in_u(u));
        }
    }

    #[test]
    fn snapshot_round_trip(
        vals in prop::collection::vec(-1e6..1e6f64, 64),
        l in 0.1..100.0f64,
        e in -10.0..10.0f64,
        t in 0.0..10.0f64,
    ) {
        let s = FieldState::new(vals, 8, l, e, t).unwrap();
        let bytes = encode_snapshot(&s);
        prop_assert_eq!(bytes.len(), 32 + 8 * 64);
        prop_assert_eq!(&bytes[..4], b"NVF1");
        prop_assert_eq!(decode_snapshot(&bytes, Path::new("mem")).unwrap(), s);
    }

    #[test]
    fn fmt_f64_round_trips(x in any::<f64>()) {
        let s = fmt_f64(x);
        let back: f64 = s.parse().unwrap();
        if x.is_nan() {
            prop_assert!(back.is_nan());
        } else {
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn config_parses_what_it_sees(
        pairs in prop::collection::vec(("[a-z_]{1,8}", "[A-Za-z0-9_.:-]{0,12}"), 0..8),
    ) {
        let mut text = String::from("# header\n\n");
        for (k, v) in &pairs {
            text.push_str(&format!("  {k} = {v}  # note\n"));
        }
        let parsed = parse_config(&text, Path::new("cfg")).unwrap();
        for (k, v) in &pairs {
            let last = pairs.iter().rev().find(|(q, _)| q == k).unwrap();
            let got = parsed.iter().find(|(q, _)| q == k).unwrap();
            prop_assert_eq!(&got.1, &last.1, "key {} value {}", k, v);
        }
    }

    #[test]
    fn gh_scaling(n in 1usize..12, t in -2.0..2.0f64, z in point(2.0), lambda in 0.3..2.0f64) {
        let p = gh_poly(n).unwrap();
        let lhs = gh_eval(&p, lambda.powi(3) * t, lambda * z);
        let rhs = lambda.powi(n as i32) * gh_eval(&p, t, z);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn bounded_solutions_are_nonpositive(
        a in -1.4..1.4f64, b in -1.4..1.4f64, n in 1usize..6,
        t in -1.0..1.0f64, x in -20.0..20.0f64, y in -20.0..20.0f64,
    ) {
        let (v, _) = eval_solution(&SolutionSpec::Q1ab { a, b }, t, x, y).unwrap();
        prop_assert!(v <= 0.0);
        if let Ok((v, _)) = eval_solution(&SolutionSpec::Qn0 { n }, t, x, y) {
            prop_assert!(v <= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn linear_flow_is_an_isometry(
        vals in prop::collection::vec(-1.0..1.0f64, 256),
        e in -2.0..4.0f64,
    ) {
        let s = FieldState::new(vals, 16, 4.0, e, 0.0).unwrap();
        let mut cfg = StepperConfig::new(0.4 * dt_max(16, 4.0, e, DealiasRule::None));
        cfg.nonlinear = false;
        cfg.dealias_rule = DealiasRule::None;
        let tr = evolve(&s, &cfg, 20.0 * cfg.dt, |_| {}).unwrap();
        let n0 = tr.observations[0].l2;
        for o in &tr.observations {
            prop_assert!((o.l2 - n0).abs() < 1e-10 * n0);
        }
    }

    #[test]
    fn inside_integral_is_bounded(alpha in 0.0..0.9f64, t in 0.1..50.0f64, u in point(20.0), e in 0.2..3.0f64) {
        let v = eval_i_inside(&IntegralSpec::new(alpha, e, u, t, Region::InsideB2)).unwrap();
        let bound = 2.0 * PI * 2f64.powf(alpha + 2.0) / (alpha + 2.0) * e.powf((alpha + 2.0) / 2.0);
        prop_assert!(v.value.norm() <= bound * (1.0 + 1e-6));
    }
}
