//! Dispersive integrals `I(t, u; E) = int |xi|^{alpha + i beta} e^{i t S(u, xi)} d xi`, their
//! restrictions to `|xi| < 2 sqrt(E)`, `|xi| > 2 sqrt(E)` and `|xi| > R`, and decay fits.
//!
//! `I_in` is computed on the torus parametrisation (see [`torus`]); every other region goes
//! through the localized patch engine in [`engine`].

mod engine;
mod torus;

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NvError, Result};
use crate::fit::{loglog_fit, SlopeFit};
use crate::{Complex64, ComplexPoint};

pub use engine::{EngineOptions, EngineReport, Patch, PatchKind};

/// Profile of the large-frequency cutoff on `s = |xi| - R`, rising from 0 at `s = 0` to 1 at
/// `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BumpProfile {
    /// `exp(1 - 1/(1 - (1 - s)^2))`.
    Exp,
    /// `(1 - cos(pi s)) / 2`.
    RaisedCosine,
}

impl BumpProfile {
    pub fn eval(self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        match self {
            BumpProfile::Exp => {
                let d = 1.0 - (1.0 - s) * (1.0 - s);
                (1.0 - 1.0 / d).exp()
            }
            BumpProfile::RaisedCosine => 0.5 * (1.0 - (PI * s).cos()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Region {
    Full,
    InsideB2,
    OutsideB2,
    LargeFreq { cutoff_r: f64, profile: BumpProfile },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralSpec {
    pub alpha: f64,
    pub beta: f64,
    pub energy: f64,
    pub u: ComplexPoint,
    pub t: f64,
    pub region: Region,
}

impl IntegralSpec {
    pub fn new(alpha: f64, energy: f64, u: ComplexPoint, t: f64, region: Region) -> Self {
        IntegralSpec { alpha, beta: 0.0, energy, u, t, region }
    }

    pub fn with_t(&self, t: f64) -> Self {
        IntegralSpec { t, ..*self }
    }

    pub fn with_u(&self, u: ComplexPoint) -> Self {
        IntegralSpec { u, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(NvError::invalid(format!("alpha must lie in [0, 1), got {}", self.alpha)));
        }
        if !self.beta.is_finite() {
            return Err(NvError::invalid("beta must be finite"));
        }
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(NvError::invalid(format!("dispersive integrals need E > 0, got {}", self.energy)));
        }
        if !crate::is_finite_point(self.u) {
            return Err(NvError::invalid("u must be finite"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(NvError::invalid(format!("t must be positive, got {}", self.t)));
        }
        if let Region::LargeFreq { cutoff_r, .. } = self.region {
            if !(cutoff_r > 2.0 && cutoff_r.is_finite()) {
                return Err(NvError::invalid(format!("cutoff R must exceed 2, got {cutoff_r}")));
            }
        }
        Ok(())
    }

    /// Radius of the ball splitting `I_in` from `I_out`.
    pub fn split_radius(&self) -> f64 {
        2.0 * self.energy.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralValue {
    pub value: Complex64,
    /// Difference between the reported value and a run at looser settings.
    pub apost_err: f64,
}

/// Absolute error below which a value is accepted whatever its size, in units of
/// `E^{(alpha + 2) / 2}`. Patch sums cancel down to roughly this level.
const APOST_FLOOR: f64 = 1e-11;

fn check_apost(spec: &IntegralSpec, v: IntegralValue) -> Result<IntegralValue> {
    let floor = APOST_FLOOR * spec.energy.powf((spec.alpha + 2.0) / 2.0);
    if v.apost_err > 0.01 * v.value.norm() && v.apost_err > floor {
        return Err(NvError::ResolutionInsufficient(format!(
            "a-posteriori error {:.3e} exceeds 1% of |I| = {:.3e}",
            v.apost_err,
            v.value.norm()
        )));
    }
    Ok(v)
}

fn problem(spec: &IntegralSpec) -> engine::Problem {
    let (lo, hi, profile) = match spec.region {
        Region::Full => (0.0, f64::INFINITY, None),
        Region::InsideB2 => (0.0, spec.split_radius(), None),
        Region::OutsideB2 => (spec.split_radius(), f64::INFINITY, None),
        Region::LargeFreq { cutoff_r, profile } => (cutoff_r, f64::INFINITY, Some(profile)),
    };
    engine::Problem { alpha: spec.alpha, beta: spec.beta, energy: spec.energy, u: spec.u, t: spec.t, lo, hi, profile }
}

/// Single engine run without the a-posteriori pass.
pub fn engine_value(spec: &IntegralSpec, opts: &EngineOptions) -> Result<Complex64> {
    spec.validate()?;
    let p = problem(spec);
    Ok(engine::Engine::new(&p, *opts).run()?.value)
}

/// Full engine diagnostics for one run.
pub fn engine_report(spec: &IntegralSpec, opts: &EngineOptions) -> Result<EngineReport> {
    spec.validate()?;
    let p = problem(spec);
    engine::Engine::new(&p, *opts).run()
}

/// The patch set the engine would use for `spec`.
pub fn engine_patches(spec: &IntegralSpec, opts: &EngineOptions) -> Result<Vec<Patch>> {
    spec.validate()?;
    let p = problem(spec);
    Ok(engine::Engine::new(&p, *opts).patches()?.0)
}

/// Fine run against a coarse one; on failure, one refined run against the fine one.
fn engine_eval(spec: &IntegralSpec, opts: &EngineOptions) -> Result<IntegralValue> {
    let coarse = engine_value(spec, &opts.coarse())?;
    let fine = engine_value(spec, opts)?;
    let first = check_apost(spec, IntegralValue { value: fine, apost_err: (fine - coarse).norm() });
    if first.is_ok() {
        return first;
    }
    let refined = engine_value(spec, &opts.refined())?;
    check_apost(spec, IntegralValue { value: refined, apost_err: (refined - fine).norm() })
}

/// `I_in` on the torus, with the size `N` compared against `2N`.
pub fn eval_i_inside(spec: &IntegralSpec) -> Result<IntegralValue> {
    spec.validate()?;
    if spec.region != Region::InsideB2 {
        return Err(NvError::invalid("eval_i_inside needs region InsideB2"));
    }
    let n = torus::torus_size(spec.t, spec.u, spec.energy);
    let a = torus::i_inside_torus(spec.alpha, spec.beta, spec.energy, spec.u, spec.t, n);
    let b = torus::i_inside_torus(spec.alpha, spec.beta, spec.energy, spec.u, spec.t, 2 * n);
    check_apost(spec, IntegralValue { value: b, apost_err: (b - a).norm() })
}

pub fn eval_i_outside(spec: &IntegralSpec) -> Result<IntegralValue> {
    eval_i_outside_with(spec, &EngineOptions::default())
}

pub fn eval_i_outside_with(spec: &IntegralSpec, opts: &EngineOptions) -> Result<IntegralValue> {
    spec.validate()?;
    if spec.region != Region::OutsideB2 {
        return Err(NvError::invalid("eval_i_outside needs region OutsideB2"));
    }
    engine_eval(spec, opts)
}

pub fn eval_i_r(spec: &IntegralSpec) -> Result<IntegralValue> {
    eval_i_r_with(spec, &EngineOptions::default())
}

pub fn eval_i_r_with(spec: &IntegralSpec, opts: &EngineOptions) -> Result<IntegralValue> {
    spec.validate()?;
    if !matches!(spec.region, Region::LargeFreq { .. }) {
        return Err(NvError::invalid("eval_i_r needs region LargeFreq"));
    }
    engine_eval(spec, opts)
}

pub fn eval_i_full(spec: &IntegralSpec) -> Result<IntegralValue> {
    eval_i_full_with(spec, &EngineOptions::default())
}

pub fn eval_i_full_with(spec: &IntegralSpec, opts: &EngineOptions) -> Result<IntegralValue> {
    spec.validate()?;
    if spec.region != Region::Full {
        return Err(NvError::invalid("eval_i_full needs region Full"));
    }
    engine_eval(spec, opts)
}

/// Dispatches on `spec.region`.
pub fn eval_integral(spec: &IntegralSpec) -> Result<IntegralValue> {
    match spec.region {
        Region::Full => eval_i_full(spec),
        Region::InsideB2 => eval_i_inside(spec),
        Region::OutsideB2 => eval_i_outside(spec),
        Region::LargeFreq { .. } => eval_i_r(spec),
    }
}

/// Representative of `u` under `u -> conj(u)` and `u -> u e^{2 pi i / 3}`, with argument in
/// `[0, pi/3]`. Both maps leave `I` unchanged.
pub fn canonical_u(u: ComplexPoint) -> ComplexPoint {
    if u.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let sector = 2.0 * PI / 3.0;
    let mut a = u.arg().rem_euclid(sector);
    if a > sector / 2.0 {
        a = sector - a;
    }
    let z = Complex64::from_polar(u.norm(), a);
    // snap tiny imaginary parts from the rotation back to the axis
    if z.im.abs() < 1e-14 * u.norm() {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// A grid of `u` values. Points are in units of `E`.
#[derive(Debug, Clone, PartialEq)]
pub enum UGrid {
    /// The six degenerate directions `+-18 e^{2 pi i k / 3}`.
    Vertices,
    Ring {
        radius: f64,
        n: usize,
    },
    Single(ComplexPoint),
    /// Vertices plus 24-point rings at `|u|` in `{0, 6, 18, 30}`.
    WorstCase,
    List(Vec<ComplexPoint>),
}

impl UGrid {
    pub fn points(&self, energy: f64) -> Vec<ComplexPoint> {
        let mut v: Vec<ComplexPoint> = match self {
            UGrid::Vertices => vertices(),
            UGrid::Ring { radius, n } => ring(*radius, *n),
            UGrid::Single(u) => vec![*u],
            UGrid::WorstCase => {
                let mut v = vertices();
                v.push(Complex64::new(0.0, 0.0));
                for r in [6.0, 18.0, 30.0] {
                    v.extend(ring(r, 24));
                }
                v
            }
            UGrid::List(l) => l.clone(),
        };
        v.iter_mut().for_each(|u| *u *= energy);
        let mut out: Vec<ComplexPoint> = Vec::with_capacity(v.len());
        for u in v {
            if !out.iter().any(|w| (w - u).norm() <= 1e-9 * (1.0 + u.norm())) {
                out.push(u);
            }
        }
        out
    }
}

fn vertices() -> Vec<ComplexPoint> {
    let mut v = Vec::new();
    for s in [1.0, -1.0] {
        for k in 0..3 {
            v.push(Complex64::from_polar(18.0 * s, 2.0 * PI * k as f64 / 3.0));
        }
    }
    v
}

fn ring(radius: f64, n: usize) -> Vec<ComplexPoint> {
    if radius == 0.0 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    (0..n).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecaySample {
    pub t: f64,
    pub value: Complex64,
    pub apost_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayProbe {
    pub spec: IntegralSpec,
    pub samples: Vec<DecaySample>,
    pub slope: f64,
    pub slope_ci: f64,
}

impl DecayProbe {
    pub fn abs_samples(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, s.value.norm())).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayScan {
    pub probes: Vec<DecayProbe>,
    /// Index of the probe with the largest (slowest) slope.
    pub worst: usize,
}

fn thread_pool() -> rayon::ThreadPool {
    let n = std::env::var("NVLAB_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
}

fn fit_samples(spec: IntegralSpec, samples: Vec<DecaySample>) -> DecayProbe {
    let (ts, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s.t, s.value.norm())).unzip();
    let SlopeFit { slope, ci, .. } = loglog_fit(&ts, &ys);
    DecayProbe { spec, samples, slope, slope_ci: ci }
}

/// Evaluates `spec` over `t_grid` for every `u` in `grid` and fits log-log slopes.
///
/// Values at symmetric `u` are computed once. No constraint on the `t` range.
pub fn decay_scan(spec: &IntegralSpec, t_grid: &[f64], grid: &UGrid) -> Result<DecayScan> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NvError::invalid("t grid must have at least 2 strictly increasing points"));
    }
    let us = grid.points(spec.energy);
    if us.is_empty() {
        return Err(NvError::invalid("empty u grid"));
    }
    let mut keys: Vec<ComplexPoint> = Vec::new();
    for u in &us {
        let c = canonical_u(*u);
        if !keys.iter().any(|k| (k - c).norm() <= 1e-12 * (1.0 + c.norm())) {
            keys.push(c);
        }
    }
    let jobs: Vec<(usize, f64)> = (0..keys.len()).flat_map(|k| t_grid.iter().map(move |&t| (k, t))).collect();
    let results: Vec<Result<IntegralValue>> = thread_pool()
        .install(|| jobs.par_iter().map(|&(k, t)| eval_integral(&IntegralSpec { u: keys[k], t, ..*spec })).collect());
    let mut table: HashMap<(usize, u64), IntegralValue> = HashMap::new();
    for (&(k, t), r) in jobs.iter().zip(results) {
        table.insert((k, t.to_bits()), r?);
    }
    let mut probes = Vec::with_capacity(us.len());
    for u in us {
        let c = canonical_u(u);
        let k = keys.iter().position(|q| (q - c).norm() <= 1e-12 * (1.0 + c.norm())).expect("key");
        let samples = t_grid
            .iter()
            .map(|&t| {
                let v = table[&(k, t.to_bits())];
                DecaySample { t, value: v.value, apost_err: v.apost_err }
            })
            .collect();
        probes.push(fit_samples(IntegralSpec { u, ..*spec }, samples));
    }
    let worst = probes.iter().enumerate().max_by(|a, b| a.1.slope.total_cmp(&b.1.slope)).map(|(i, _)| i).unwrap_or(0);
    Ok(DecayScan { probes, worst })
}

/// Large-time decay fit at the single `u` of `spec`.
pub fn fit_decay(spec: &IntegralSpec, t_grid: &[f64]) -> Result<DecayProbe> {
    check_large_t(t_grid)?;
    let mut scan = decay_scan(spec, t_grid, &UGrid::Single(spec.u / spec.energy))?;
    Ok(scan.probes.remove(0))
}

/// Large-time decay fits over the worst-case grid.
pub fn fit_decay_worst_case(spec: &IntegralSpec, t_grid: &[f64]) -> Result<DecayScan> {
    check_large_t(t_grid)?;
    decay_scan(spec, t_grid, &UGrid::WorstCase)
}

fn check_large_t(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 8 {
        return Err(NvError::invalid("decay fits need at least 8 times"));
    }
    if t_grid.iter().any(|&t| t < 5.0) {
        return Err(NvError::invalid("decay fits need t >= 5"));
    }
    Ok(())
}

/// Relative discrepancy in `I(t, u; E) = E^{(alpha + 2)/2} I(E^{3/2} t, u / E; 1)` for the
/// full integral.
pub fn scaling_identity_check(t: f64, u: ComplexPoint, energy: f64, alpha: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(NvError::invalid("scaling check needs E > 0"));
    }
    let lhs = eval_i_full(&IntegralSpec::new(alpha, energy, u, t, Region::Full))?.value;
    let rhs = eval_i_full(&IntegralSpec::new(alpha, 1.0, u / energy, energy.powf(1.5) * t, Region::Full))?.value
        * energy.powf((alpha + 2.0) / 2.0);
    Ok((lhs - rhs).norm() / rhs.norm())
}
