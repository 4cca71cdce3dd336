//! Pseudospectral integration of the full equation on a periodic box.
//!
//! With the FFT convention `d/dx <-> i k`, the linear part of the equation is diagonal with
//! symbol `-i w(k; E)`, so a Fourier mode evolves as `e^{-i t w(k; E)}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{NvError, Result};
use crate::spectral::{Fft2, Grid};
use crate::symbol::{dbar_inv_dz_multiplier, eval_symbol};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    IntegratingFactorRK4,
    Etdrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DealiasRule {
    TwoThirds,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias_rule: DealiasRule,
    pub cfl_safety: f64,
    /// Switch off the quadratic term (linear propagation only).
    pub nonlinear: bool,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Self {
        StepperConfig {
            dt,
            scheme: Scheme::IntegratingFactorRK4,
            dealias_rule: DealiasRule::TwoThirds,
            cfl_safety: 0.5,
            nonlinear: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// Row-major `n x n` samples, row index is `y`.
    pub values: Vec<f64>,
    pub n: usize,
    pub half_length: f64,
    pub energy: f64,
    pub time: f64,
}

impl FieldState {
    pub fn new(values: Vec<f64>, n: usize, half_length: f64, energy: f64, time: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(NvError::invalid(format!("grid size must be a power of two >= 4, got {n}")));
        }
        if values.len() != n * n {
            return Err(NvError::invalid(format!("expected {} values, got {}", n * n, values.len())));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(NvError::invalid("box half-length must be positive"));
        }
        if !energy.is_finite() {
            return Err(NvError::invalid("energy must be finite"));
        }
        Ok(FieldState { values, n, half_length, energy, time })
    }

    /// Samples `f(x, y)` on the grid.
    pub fn from_fn(n: usize, half_length: f64, energy: f64, f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let g = Grid::new(n, half_length);
        Self::new(g.sample(f), n, half_length, energy, 0.0)
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.half_length)
    }

    pub fn mass(&self) -> f64 {
        self.grid().cell_area() * self.values.iter().sum::<f64>()
    }

    pub fn l2(&self) -> f64 {
        (self.grid().cell_area() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation {
    pub time: f64,
    pub mass: f64,
    pub l2: f64,
    pub linf: f64,
    /// `(sum (1 + |k|^2) |v_hat|^2)^{1/2}` with the `L^2` normalisation.
    pub hs_proxy: f64,
}

fn retained(grid: &Grid, rule: DealiasRule, i: usize) -> bool {
    if grid.is_nyquist(i) {
        return false;
    }
    match rule {
        DealiasRule::None => true,
        DealiasRule::TwoThirds => 3 * grid.mode(i).unsigned_abs() < grid.n as u64,
    }
}

/// Largest stable step by the phase-rotation heuristic `2 pi / max |w|` over retained modes.
pub fn dt_max(n: usize, half_length: f64, energy: f64, rule: DealiasRule) -> f64 {
    let g = Grid::new(n, half_length);
    let mut wmax = 0.0f64;
    for j in (0..n).filter(|&j| retained(&g, rule, j)) {
        for i in (0..n).filter(|&i| retained(&g, rule, i)) {
            let w = eval_symbol(Complex64::new(g.wavenumber(i), g.wavenumber(j)), energy);
            wmax = wmax.max(w.abs());
        }
    }
    if wmax == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / wmax
    }
}

struct Coeffs {
    dt: f64,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    // ETDRK4 only
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

/// A running simulation that owns its spectral state.
pub struct Simulation {
    grid: Grid,
    energy: f64,
    config: StepperConfig,
    fft: Fft2,
    vhat: Vec<Complex64>,
    time: f64,
    lin: Vec<Complex64>,
    mult: Vec<Complex64>,
    mask: Vec<bool>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    coeffs: Coeffs,
    scratch: Vec<Complex64>,
    scratch2: Vec<Complex64>,
    pub retries: usize,
}

impl Simulation {
    pub fn new(state: &FieldState, config: StepperConfig) -> Result<Self> {
        FieldState::new(state.values.clone(), state.n, state.half_length, state.energy, state.time)?;
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(NvError::invalid("dt must be positive"));
        }
        if !(config.cfl_safety > 0.0 && config.cfl_safety <= 1.0) {
            return Err(NvError::invalid("cfl_safety must lie in (0, 1]"));
        }
        let limit = config.cfl_safety * dt_max(state.n, state.half_length, state.energy, config.dealias_rule);
        if config.dt > limit {
            return Err(NvError::invalid(format!("dt = {} exceeds cfl_safety * dt_max = {limit}", config.dt)));
        }
        let grid = state.grid();
        let n = grid.n;
        let mut lin = vec![Complex64::new(0.0, 0.0); n * n];
        let mut mult = lin.clone();
        let mut mask = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let (k1, k2) = (grid.wavenumber(i), grid.wavenumber(j));
                let idx = j * n + i;
                lin[idx] = Complex64::new(0.0, -eval_symbol(Complex64::new(k1, k2), state.energy));
                mult[idx] = dbar_inv_dz_multiplier(k1, k2);
                mask[idx] = retained(&grid, config.dealias_rule, i) && retained(&grid, config.dealias_rule, j);
            }
        }
        let mut fft = Fft2::new(n);
        let mut vhat = fft.forward_real(&state.values);
        for (c, &m) in vhat.iter_mut().zip(&mask) {
            if !m {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let kx = (0..n).map(|i| grid.wavenumber(i)).collect();
        let ky = (0..n).map(|j| grid.wavenumber(j)).collect();
        let coeffs = Self::coefficients(&lin, config.dt, config.scheme);
        Ok(Simulation {
            grid,
            energy: state.energy,
            config,
            fft,
            vhat,
            time: state.time,
            lin,
            mult,
            mask,
            kx,
            ky,
            coeffs,
            scratch: vec![Complex64::new(0.0, 0.0); n * n],
            scratch2: vec![Complex64::new(0.0, 0.0); n * n],
            retries: 0,
        })
    }

    fn coefficients(lin: &[Complex64], dt: f64, scheme: Scheme) -> Coeffs {
        let e: Vec<Complex64> = lin.iter().map(|l| (l * dt).exp()).collect();
        let e2: Vec<Complex64> = lin.iter().map(|l| (l * (0.5 * dt)).exp()).collect();
        let (mut q, mut f1, mut f2, mut f3) = (vec![], vec![], vec![], vec![]);
        if scheme == Scheme::Etdrk4 {
            // contour means of the phi-functions (Kassam-Trefethen), full circle since L is imaginary
            let m = 32;
            let roots: Vec<Complex64> =
                (0..m).map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / m as f64)).collect();
            for l in lin {
                let (mut sq, mut s1, mut s2, mut s3) = Default::default();
                for r0 in &roots {
                    let r: Complex64 = l * dt + r0;
                    let er = r.exp();
                    let r3 = r * r * r;
                    sq += ((r * 0.5).exp() - 1.0) / r;
                    s1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
                    s2 += (2.0 + r + er * (r - 2.0)) / r3;
                    s3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
                }
                let k = dt / m as f64;
                let (sq, s1, s2, s3): (Complex64, Complex64, Complex64, Complex64) = (sq, s1, s2, s3);
                q.push(sq * k);
                f1.push(s1 * k);
                f2.push(s2 * k);
                f3.push(s3 * k);
            }
        }
        Coeffs { dt, e, e2, q, f1, f2, f3 }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.vhat
    }

    pub fn values(&mut self) -> Vec<f64> {
        self.scratch.copy_from_slice(&self.vhat);
        self.fft.inverse(&mut self.scratch);
        self.scratch.iter().map(|c| c.re).collect()
    }

    pub fn state(&mut self) -> FieldState {
        FieldState {
            values: self.values(),
            n: self.grid.n,
            half_length: self.grid.half_length,
            energy: self.energy,
            time: self.time,
        }
    }

    fn l2_spectral(&self, vhat: &[Complex64]) -> f64 {
        let n2 = (self.grid.n * self.grid.n) as f64;
        (self.grid.cell_area() * vhat.iter().map(|c| c.norm_sqr()).sum::<f64>() / n2).sqrt()
    }

    pub fn observe(&mut self) -> Observation {
        let n = self.grid.n;
        let n2 = (n * n) as f64;
        let mut hs = 0.0;
        for j in 0..n {
            for i in 0..n {
                let k2 = self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j];
                hs += (1.0 + k2) * self.vhat[j * n + i].norm_sqr();
            }
        }
        let values = self.values();
        let cell = self.grid.cell_area();
        Observation {
            time: self.time,
            mass: cell * values.iter().sum::<f64>(),
            l2: self.l2_spectral(&self.vhat),
            linf: values.iter().fold(0.0, |m, v| m.max(v.abs())),
            hs_proxy: (cell * hs / n2).sqrt(),
        }
    }

    /// Spectral nonlinear term `2 div(v w)` with `w = -3 dbar^{-1} d v`, written into `out`.
    fn nonlinear(&mut self, vhat: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n;
        if !self.config.nonlinear {
            out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            return;
        }
        // physical v and W
        for k in 0..n * n {
            let v = if self.mask[k] { vhat[k] } else { Complex64::new(0.0, 0.0) };
            self.scratch[k] = v;
            self.scratch2[k] = -3.0 * self.mult[k] * v;
        }
        self.fft.inverse(&mut self.scratch);
        self.fft.inverse(&mut self.scratch2);
        // vW, then div(v w) = 2 Re d_z(vW)
        for k in 0..n * n {
            self.scratch2[k] *= self.scratch[k].re;
        }
        self.fft.forward(&mut self.scratch2);
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                let d = 0.5 * Complex64::new(0.0, 1.0) * Complex64::new(self.kx[i], -self.ky[j]);
                self.scratch[idx] = d * self.scratch2[idx];
            }
        }
        for j in 0..n {
            let jm = (n - j) % n;
            for i in 0..n {
                let im = (n - i) % n;
                let idx = j * n + i;
                out[idx] = if self.mask[idx] {
                    2.0 * (self.scratch[idx] + self.scratch[jm * n + im].conj())
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
        }
    }

    /// `d v / d t` in Fourier space.
    pub fn rhs_spectral(&mut self, vhat: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); vhat.len()];
        self.nonlinear(vhat, &mut out);
        for ((o, l), (v, m)) in out.iter_mut().zip(&self.lin).zip(vhat.iter().zip(&self.mask)) {
            if *m {
                *o += l * v;
            }
        }
        out
    }

    fn advance(&mut self, vhat: &[Complex64], dt: f64) -> Vec<Complex64> {
        if (self.coeffs.dt - dt).abs() > 1e-15 * dt {
            self.coeffs = Self::coefficients(&self.lin, dt, self.config.scheme);
        }
        let len = vhat.len();
        let z = Complex64::new(0.0, 0.0);
        let mut na = vec![z; len];
        let mut nb = vec![z; len];
        let mut nc = vec![z; len];
        let mut nd = vec![z; len];
        let mut tmp = vec![z; len];
        let c = std::mem::replace(
            &mut self.coeffs,
            Coeffs { dt: 0.0, e: vec![], e2: vec![], q: vec![], f1: vec![], f2: vec![], f3: vec![] },
        );
        let out: Vec<Complex64> = match self.config.scheme {
            Scheme::IntegratingFactorRK4 => {
                self.nonlinear(vhat, &mut na);
                for k in 0..len {
                    tmp[k] = c.e2[k] * (vhat[k] + 0.5 * dt * na[k]);
                }
                self.nonlinear(&tmp, &mut nb);
                for k in 0..len {
                    tmp[k] = c.e2[k] * vhat[k] + 0.5 * dt * nb[k];
                }
                self.nonlinear(&tmp, &mut nc);
                for k in 0..len {
                    tmp[k] = c.e[k] * vhat[k] + dt * c.e2[k] * nc[k];
                }
                self.nonlinear(&tmp, &mut nd);
                (0..len)
                    .map(|k| c.e[k] * vhat[k] + dt / 6.0 * (c.e[k] * na[k] + 2.0 * c.e2[k] * (nb[k] + nc[k]) + nd[k]))
                    .collect()
            }
            Scheme::Etdrk4 => {
                let mut a = vec![z; len];
                let mut b = vec![z; len];
                self.nonlinear(vhat, &mut na);
                for k in 0..len {
                    a[k] = c.e2[k] * vhat[k] + c.q[k] * na[k];
                }
                self.nonlinear(&a, &mut nb);
                for k in 0..len {
                    b[k] = c.e2[k] * vhat[k] + c.q[k] * nb[k];
                }
                self.nonlinear(&b, &mut nc);
                for k in 0..len {
                    tmp[k] = c.e2[k] * a[k] + c.q[k] * (2.0 * nc[k] - na[k]);
                }
                self.nonlinear(&tmp, &mut nd);
                (0..len)
                    .map(|k| c.e[k] * vhat[k] + c.f1[k] * na[k] + 2.0 * c.f2[k] * (nb[k] + nc[k]) + c.f3[k] * nd[k])
                    .collect()
            }
        };
        self.coeffs = c;
        out
    }

    /// One accepted step of size `config.dt`, with the dt/2 retry on a tenfold `L^2` jump.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.dt;
        let before = self.l2_spectral(&self.vhat);
        let next = self.advance(&self.vhat.clone(), dt);
        let after = self.l2_spectral(&next);
        if after.is_finite() && after <= 10.0 * before.max(f64::MIN_POSITIVE) {
            self.vhat = next;
            self.time += dt;
            return Ok(());
        }
        self.retries += 1;
        let half = self.advance(&self.vhat.clone(), 0.5 * dt);
        let retry = self.advance(&half, 0.5 * dt);
        let after2 = self.l2_spectral(&retry);
        if after2.is_finite() && after2 <= 10.0 * before {
            self.vhat = retry;
            self.time += dt;
            return Ok(());
        }
        // growth independent of the step size points at the solution rather than the scheme
        let ratio = if after.is_finite() && after2.is_finite() { after2 / after } else { 0.0 };
        Err(NvError::Instability { time: self.time + dt, blowup_suspected: ratio > 0.5 })
    }
}

/// `dv/dt` of a state, in physical space.
pub fn rhs(state: &FieldState, config: &StepperConfig) -> Result<Vec<f64>> {
    let mut cfg = *config;
    cfg.dt = 1e-300;
    let mut sim = Simulation::new(state, cfg)?;
    let vhat = sim.vhat.clone();
    let mut r = sim.rhs_spectral(&vhat);
    sim.fft.inverse(&mut r);
    Ok(r.iter().map(|c| c.re).collect())
}

/// A single step.
pub fn step(state: &FieldState, config: &StepperConfig) -> Result<FieldState> {
    let mut sim = Simulation::new(state, *config)?;
    sim.step()?;
    Ok(sim.state())
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: FieldState,
    pub observations: Vec<Observation>,
    pub steps: usize,
    pub retries: usize,
}

/// Steps to `t_final` (the last step is shortened to land on it), calling `observer` after
/// every accepted step.
pub fn evolve(
    state: &FieldState,
    config: &StepperConfig,
    t_final: f64,
    mut observer: impl FnMut(&Observation),
) -> Result<Trajectory> {
    if !(t_final >= state.time) {
        return Err(NvError::invalid("t_final must not precede the initial time"));
    }
    let mut sim = Simulation::new(state, *config)?;
    let mut observations = vec![sim.observe()];
    observer(&observations[0]);
    let nsteps = ((t_final - state.time) / config.dt - 1e-9).ceil().max(0.0) as usize;
    if nsteps > 0 {
        sim.config.dt = (t_final - state.time) / nsteps as f64;
    }
    for _ in 0..nsteps {
        sim.step()?;
        let o = sim.observe();
        observer(&o);
        observations.push(o);
    }
    Ok(Trajectory { final_state: sim.state(), observations, steps: nsteps, retries: sim.retries })
}

/// Evolves `v0` and `lambda^2 v0(lambda x)` (box `L / lambda`, energy `lambda^2 E`, time
/// `t / lambda^3`) and returns the relative `l^2` discrepancy after undoing the scaling.
pub fn scaling_symmetry_check(v0: &FieldState, lambda: f64, config: &StepperConfig, t_final: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(NvError::invalid("lambda must be positive"));
    }
    let a = evolve(v0, config, t_final, |_| {})?.final_state;
    let l2 = lambda * lambda;
    let scaled = FieldState::new(
        v0.values.iter().map(|v| l2 * v).collect(),
        v0.n,
        v0.half_length / lambda,
        l2 * v0.energy,
        v0.time / lambda.powi(3),
    )?;
    let mut cfg = *config;
    cfg.dt = config.dt / lambda.powi(3);
    let b = evolve(&scaled, &cfg, scaled.time + (t_final - v0.time) / lambda.powi(3), |_| {})?.final_state;
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y / l2).powi(2)).sum();
    let den: f64 = a.values.iter().map(|x| x * x).sum();
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, l: f64, e: f64, amp: f64, width: f64) -> FieldState {
        FieldState::from_fn(n, l, e, |x, y| amp * (-(x * x + y * y) / (width * width)).exp()).unwrap()
    }

    #[test]
    fn zero_field_has_zero_rhs() {
        let s = FieldState::new(vec![0.0; 64], 8, 3.0, 1.0, 0.0).unwrap();
        let r = rhs(&s, &StepperConfig::new(1e-3)).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_linear_propagation() {
        let (n, l, e) = (32, PI, 0.7);
        let g = Grid::new(n, l);
        let (m1, m2) = (3.0, -2.0);
        let s = FieldState::from_fn(n, l, e, |x, y| (m1 * x + m2 * y).cos()).unwrap();
        let mut cfg = StepperConfig::new(1e-4);
        cfg.nonlinear = false;
        let out = step(&s, &cfg).unwrap();
        let w = eval_symbol(Complex64::new(m1, m2), e);
        let exact = g.sample(|x, y| (m1 * x + m2 * y - w * cfg.dt).cos());
        let err = out.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn dt_limit_enforced() {
        let s = gaussian(32, 10.0, 0.0, 0.1, 1.0);
        let lim = dt_max(32, 10.0, 0.0, DealiasRule::TwoThirds);
        assert!(step(&s, &StepperConfig::new(lim)).is_err());
        assert!(step(&s, &StepperConfig::new(0.4 * lim)).is_ok());
    }

    #[test]
    fn mass_conserved_and_reality_kept() {
        let s = gaussian(64, 10.0, 2.0, 0.5, 1.5);
        let lim = dt_max(64, 10.0, 2.0, DealiasRule::TwoThirds);
        let tr = evolve(&s, &StepperConfig::new(0.4 * lim), 20.0 * 0.4 * lim, |_| {}).unwrap();
        let m0 = tr.observations[0].mass;
        let m1 = tr.observations.last().unwrap().mass;
        assert!((m1 - m0).abs() < 1e-10 * m0.abs());
    }

    #[test]
    fn etdrk4_agrees_with_if_rk4() {
        let s = gaussian(64, 10.0, 1.0, 0.5, 1.5);
        let lim = dt_max(64, 10.0, 1.0, DealiasRule::TwoThirds);
        let mut c = StepperConfig::new(0.25 * lim);
        let a = evolve(&s, &c, 10.0 * c.dt, |_| {}).unwrap().final_state;
        c.scheme = Scheme::Etdrk4;
        let b = evolve(&s, &c, 10.0 * c.dt, |_| {}).unwrap().final_state;
        let d: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-6 * a.linf(), "{d}");
    }

    #[test]
    fn scaling_identity_is_exact_for_unit_lambda() {
        let s = gaussian(32, 8.0, 0.0, 0.3, 1.0);
        let lim = dt_max(32, 8.0, 0.0, DealiasRule::TwoThirds);
        let r = scaling_symmetry_check(&s, 1.0, &StepperConfig::new(0.4 * lim), 4.0 * 0.4 * lim).unwrap();
        assert_eq!(r, 0.0);
    }
}
