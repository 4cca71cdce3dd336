//! Localized evaluation of `int chi(|xi|) |xi|^{alpha + i beta} e^{i t S(u, xi)} d xi`.
//!
//! Work is done in origin-centred polar coordinates, where the phase reads
//! `S = A(r) cos 3 theta + r |u| cos(theta - theta_u)` with `A(r) = 2 (r^3 - 3 E r)`.
//!
//! The plane is covered by patches (origin disk, polar sectors, full annuli) combined into a
//! sequential partition `omega_k = b_k prod_{j<k} (1 - b_j)`. Each patch is integrated with
//! Gauss-Legendre panels in `r` and a midpoint rule in `theta`. The remainder
//! `prod_j (1 - b_j)` is dropped once every point of its support passes the non-stationary
//! test `t |d S| min(l, |d S| / |d^2 S|) >= Q` along `r` or along `theta`, where `l` is the
//! amplitude scale in that direction. Jump circles of `chi` are tested tangentially.

use std::f64::consts::PI;

use crate::error::{NvError, Result};
use crate::quad::{plateau, GaussLegendre};
use crate::symbol::{phase_gradient, phase_hessian};
use crate::Complex64;

use super::BumpProfile;

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Required phase budget for dropping the remainder.
    pub q: f64,
    /// Multiplies node counts in both directions.
    pub node_factor: f64,
    pub max_iterations: usize,
    /// Upper bound on integrand evaluations per call.
    pub max_nodes: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { q: 100.0, node_factor: 1.0, max_iterations: 64, max_nodes: 6e8 }
    }
}

impl EngineOptions {
    /// Looser settings used for the a-posteriori estimate.
    pub fn coarse(&self) -> Self {
        EngineOptions { q: self.q * 0.75, node_factor: self.node_factor * 0.8, ..*self }
    }

    pub fn refined(&self) -> Self {
        EngineOptions { q: self.q * 1.5, node_factor: self.node_factor * 1.25, ..*self }
    }
}

/// Radial amplitude `chi`: indicator of `[lo, hi]`, optionally smoothed by a profile on
/// `[lo, lo + 1]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Problem {
    pub alpha: f64,
    pub beta: f64,
    pub energy: f64,
    pub u: Complex64,
    pub t: f64,
    pub lo: f64,
    pub hi: f64,
    pub profile: Option<BumpProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchKind {
    Origin,
    Stationary,
    Boundary,
    Certificate,
}

#[derive(Debug, Clone, Copy)]
pub struct Patch {
    pub kind: PatchKind,
    pub rc: f64,
    pub thc: f64,
    pub rho: f64,
    /// Angular half-width; `None` for a full annulus.
    pub dth: Option<f64>,
    /// The next patch is the image of this one under `xi -> -xi`.
    pub paired: bool,
}

#[derive(Debug, Clone)]
pub struct EngineReport {
    pub value: Complex64,
    pub patches: Vec<Patch>,
    pub nodes: f64,
    pub patch_nodes: Vec<f64>,
    pub iterations: usize,
    pub r_cert: f64,
}

fn wrap(a: f64) -> f64 {
    let x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x == -PI {
        PI
    } else {
        x
    }
}

impl Patch {
    fn radial(&self, r: f64) -> f64 {
        match self.kind {
            PatchKind::Origin => plateau(r / self.rho),
            _ => plateau((r - self.rc) / self.rho),
        }
    }

    fn angular(&self, th: f64) -> f64 {
        match self.dth {
            None => 1.0,
            Some(d) => plateau(wrap(th - self.thc) / d),
        }
    }

    fn r_range(&self) -> (f64, f64) {
        match self.kind {
            PatchKind::Origin => (0.0, self.rho),
            _ => ((self.rc - self.rho).max(0.0), self.rc + self.rho),
        }
    }

    fn window(&self) -> (f64, f64) {
        match self.dth {
            None => (-PI, 2.0 * PI),
            Some(d) => (self.thc - d, 2.0 * d),
        }
    }

    fn mirror(&self) -> Patch {
        Patch { thc: wrap(self.thc + PI), paired: false, ..*self }
    }
}

/// Remainder weight and the amplitude scales induced by patches at `(r, theta)`.
fn coverage(patches: &[Patch], r: f64, th: f64) -> (f64, f64, f64) {
    let (mut m, mut lr, mut lth) = (1.0, f64::INFINITY, f64::INFINITY);
    for p in patches {
        let fr = p.radial(r);
        if fr == 0.0 {
            continue;
        }
        let fa = p.angular(th);
        let b = fr * fa;
        if b == 0.0 {
            continue;
        }
        m *= 1.0 - b;
        if m == 0.0 {
            return (0.0, lr, lth);
        }
        if fr < 1.0 {
            lr = lr.min(0.5 * p.rho);
        }
        if fa < 1.0 {
            lth = lth.min(0.5 * p.dth.unwrap_or(PI));
        }
    }
    (m, lr, lth)
}

pub(crate) struct Engine<'a> {
    p: &'a Problem,
    opts: EngineOptions,
    um: f64,
    ua: f64,
}

impl<'a> Engine<'a> {
    pub fn new(p: &'a Problem, opts: EngineOptions) -> Self {
        Engine { p, opts, um: p.u.norm(), ua: p.u.arg() }
    }

    fn amp_a(&self, r: f64) -> f64 {
        2.0 * (r * r * r - 3.0 * self.p.energy * r)
    }

    fn phase(&self, r: f64, th: f64) -> f64 {
        self.amp_a(r) * (3.0 * th).cos() + r * self.um * (th - self.ua).cos()
    }

    /// `(S_r, S_rr, S_theta, S_thetatheta, S_rtheta)`.
    fn derivs(&self, r: f64, th: f64) -> [f64; 5] {
        let (s3, c3) = (3.0 * th).sin_cos();
        let (s1, c1) = (th - self.ua).sin_cos();
        let a = self.amp_a(r);
        let a1 = 6.0 * r * r - 6.0 * self.p.energy;
        [
            a1 * c3 + self.um * c1,
            12.0 * r * c3,
            -3.0 * a * s3 - r * self.um * s1,
            -9.0 * a * c3 - r * self.um * c1,
            -3.0 * a1 * s3 - self.um * s1,
        ]
    }

    fn in_support(&self, r: f64) -> bool {
        r >= self.p.lo && r <= self.p.hi
    }

    fn profile_zone(&self, r: f64) -> bool {
        self.p.profile.is_some() && r > self.p.lo && r < self.p.lo + 1.0
    }

    fn chi(&self, r: f64) -> f64 {
        if !self.in_support(r) {
            return 0.0;
        }
        match self.p.profile {
            Some(pr) => pr.eval(r - self.p.lo),
            None => 1.0,
        }
    }

    /// `chi(r) r^{1 + alpha + i beta}`, the radial amplitude including the area element.
    fn amplitude(&self, r: f64) -> Complex64 {
        let c = self.chi(r);
        if c == 0.0 || r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(c * r.powf(1.0 + self.p.alpha), self.p.beta * r.ln())
    }

    fn special_radii(&self) -> Vec<f64> {
        let mut v = Vec::new();
        if self.p.lo > 0.0 {
            v.push(self.p.lo);
        }
        if self.p.profile.is_some() {
            v.push(self.p.lo + 1.0);
        }
        if self.p.hi.is_finite() {
            v.push(self.p.hi);
        }
        v
    }

    fn ratio(&self, r: f64, th: f64, lr: f64, lth: f64) -> f64 {
        let [sr, srr, st, stt, srt] = self.derivs(r, th);
        let mut lr = lr.min(r);
        if self.profile_zone(r) {
            lr = lr.min(0.15);
        }
        let lth = lth.min(PI);
        let t = self.p.t;
        // a derivative that moves along the other axis limits the usable scale too
        let cr = t * sr.abs() * lr.min(sr.abs() / (srr.abs() + srt.abs() / r));
        let ct = t * st.abs() * lth.min(st.abs() / (stt.abs() + r * srt.abs()));
        let xi = Complex64::from_polar(r, th);
        let g = phase_gradient(self.p.u, xi, self.p.energy).norm();
        let (a, b) = phase_hessian(xi, self.p.energy);
        let cc = t * g * lr.min(r * lth).min(g / (a.norm() + b.norm()));
        cr.max(ct).max(cc) / self.opts.q
    }

    fn tangential_ratio(&self, r: f64, th: f64, lth: f64) -> f64 {
        let [_, _, st, stt, _] = self.derivs(r, th);
        self.p.t * st.abs() * lth.min(PI).min(st.abs() / stt.abs()) / self.opts.q
    }

    /// Radius beyond which the test passes everywhere, from `|grad S| >= 6 r^2 - 18 E - |u|`.
    fn r_cert(&self) -> f64 {
        let (e, t, q) = (self.p.energy, self.p.t, self.opts.q);
        let s2 = std::f64::consts::SQRT_2;
        let lb = |r: f64| {
            let g = 6.0 * r * r - 18.0 * e - self.um;
            if g <= 0.0 {
                return 0.0;
            }
            let mut l = r;
            if self.profile_zone(r) {
                l = l.min(0.15);
            }
            let cr = t * g / s2 * l.min(g / (s2 * 12.0 * r));
            let c2 = 18.0 * r * r * r + 54.0 * e * r + r * self.um;
            let ct = t * r * g / s2 * PI.min(r * g / (s2 * c2));
            cr.min(ct) / q
        };
        let n = 4000;
        let (a, b) = (1e-3f64.ln(), 1e5f64.ln());
        let mut last_fail = 1e-3;
        for k in 0..=n {
            let r = (a + (b - a) * k as f64 / n as f64).exp();
            if lb(r) < 1.0 {
                last_fail = r;
            }
        }
        let mut rc = last_fail * 1.01;
        if self.p.profile.is_some() {
            rc = rc.max(self.p.lo + 1.0);
        }
        rc.max(self.p.lo)
    }

    fn make_patch(&self, kind: PatchKind, rc: f64, thc: f64, rho: f64) -> Patch {
        let dth = match kind {
            PatchKind::Origin => None,
            _ if rho > 0.5 * rc => None,
            _ => Some(rho / rc),
        };
        Patch { kind, rc, thc, rho, dth, paired: false }
    }

    /// Transition-zone samples of a patch.
    fn transition_samples(&self, p: &Patch) -> Vec<(f64, f64)> {
        let levels = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let mut out = Vec::new();
        match (p.kind, p.dth) {
            (PatchKind::Origin, _) => {
                for s in levels {
                    for k in 0..256 {
                        out.push((s * p.rho, 2.0 * PI * k as f64 / 256.0));
                    }
                }
            }
            (_, None) => {
                for s in levels {
                    for sign in [-1.0, 1.0] {
                        let r = p.rc + sign * s * p.rho;
                        if r > 0.0 {
                            for k in 0..256 {
                                out.push((r, 2.0 * PI * k as f64 / 256.0));
                            }
                        }
                    }
                }
            }
            (_, Some(d)) => {
                let m = 24;
                for s in levels {
                    for k in 0..=m {
                        let f = -1.0 + 2.0 * k as f64 / m as f64;
                        for (dr, da) in [(s, f), (-s, f), (f, s), (f, -s)] {
                            let r = p.rc + dr * p.rho;
                            if r > 0.0 {
                                out.push((r, p.thc + da * d));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn patch_ok(&self, p: &Patch, others: &[Patch]) -> bool {
        let own = std::slice::from_ref(p);
        for (r, th) in self.transition_samples(p) {
            if !self.in_support(r) {
                continue;
            }
            if coverage(others, r, th).0 == 0.0 {
                continue;
            }
            let (_, lr, lth) = coverage(own, r, th);
            if self.ratio(r, th, lr, lth) < 1.0 {
                return false;
            }
        }
        if let (PatchKind::Boundary, Some(d)) = (p.kind, p.dth) {
            for k in 0..=32 {
                let s = 0.5 + 0.5 * k as f64 / 32.0;
                for sign in [-1.0, 1.0] {
                    let th = p.thc + sign * s * d;
                    if coverage(others, p.rc, th).0 == 0.0 {
                        continue;
                    }
                    let (_, _, lth) = coverage(own, p.rc, th);
                    if self.tangential_ratio(p.rc, th, lth) < 1.0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Grows a patch until its transition zone passes. Sectors stop at `rho = rc / 2`; what
    /// still fails there is left to the certificate grid.
    fn size_patch(&self, kind: PatchKind, rc: f64, thc: f64, rho0: f64, others: &[Patch]) -> Result<Patch> {
        let mut rho = rho0;
        let sector = rho0 <= 0.5 * rc;
        for _ in 0..200 {
            let p = self.make_patch(kind, rc, thc, rho);
            if self.patch_ok(&p, others) {
                return Ok(p);
            }
            if sector && rho * 1.2 > 0.5 * rc {
                return Ok(p);
            }
            rho *= 1.2;
        }
        Err(NvError::ResolutionInsufficient(format!("no admissible patch size near |xi| = {rc:.4}, arg = {thc:.4}")))
    }

    /// Smallest admissible origin disk, or the largest affordable one. Failures left in the
    /// transition zone of the latter are picked up by the certificate grid.
    fn size_origin(&self) -> Patch {
        let mut rho = 1e-4;
        loop {
            let p = self.make_patch(PatchKind::Origin, 0.0, 0.0, rho);
            if self.patch_ok(&p, &[]) {
                return p;
            }
            let next = rho * 1.2;
            if self.direct_cost(next) > ORIGIN_COST {
                return p;
            }
            rho = next;
        }
    }

    fn rho_start(&self, rc: f64) -> f64 {
        let s = 0.3 * (self.opts.q / (self.p.t * (12.0 * rc + 1.0))).sqrt();
        s.min(0.25 * rc.max(1e-3))
    }

    fn newton_stationary(&self, xi0: Complex64) -> Option<Complex64> {
        let (u, e) = (self.p.u, self.p.energy);
        let mut xi = xi0;
        for _ in 0..60 {
            if xi.norm() < 1e-9 {
                return None;
            }
            let g = phase_gradient(u, xi, e);
            if g.norm() < 1e-12 * (1.0 + u.norm() + xi.norm_sqr()) {
                return Some(xi);
            }
            let (a, b) = phase_hessian(xi, e);
            let c1 = a + b;
            let c2 = Complex64::new(0.0, 1.0) * (a - b);
            let det = c1.re * c2.im - c2.re * c1.im;
            if det.abs() < 1e-300 {
                return None;
            }
            let x = (-g.re * c2.im + g.im * c2.re) / det;
            let y = (-g.im * c1.re + g.re * c1.im) / det;
            let mut d = Complex64::new(x, y);
            let cap = 0.5 * xi.norm();
            if d.norm() > cap {
                d *= cap / d.norm();
            }
            xi += d;
        }
        None
    }

    fn newton_tangential(&self, r: f64, th0: f64) -> f64 {
        let mut th = th0;
        for _ in 0..40 {
            let [_, _, st, stt, _] = self.derivs(r, th);
            if stt == 0.0 {
                break;
            }
            let d = (st / stt).clamp(-0.05, 0.05);
            th -= d;
            if d.abs() < 1e-14 {
                break;
            }
        }
        th
    }

    /// Zeros of `S_theta` on the circle of radius `r`.
    fn tangential_roots(&self, r: f64) -> Vec<f64> {
        let n = 4096;
        let f = |th: f64| self.derivs(r, th)[2];
        let mut roots = Vec::new();
        let mut prev = f(0.0);
        for k in 1..=n {
            let th = 2.0 * PI * k as f64 / n as f64;
            let cur = f(th);
            if prev == 0.0 || prev.signum() != cur.signum() {
                let (mut a, mut b) = (2.0 * PI * (k - 1) as f64 / n as f64, th);
                let fa = f(a);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if f(m).signum() == fa.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(wrap(0.5 * (a + b)));
            }
            prev = cur;
        }
        roots
    }

    /// Points of the certificate grid inside the support and below `r_end`.
    fn grid(&self, r_end: f64) -> Vec<(f64, f64)> {
        let (q, t) = (self.opts.q, self.p.t);
        let mut pts = Vec::new();
        let mut r = self.p.lo.max(1e-4);
        let hi = r_end.min(self.p.hi);
        while r <= hi {
            let h = (0.25 * (q / (t * (12.0 * r + 1.0))).sqrt()).min(0.5 * r + 1e-4);
            let n = ((2.0 * PI * r / h).ceil() as usize).clamp(32, 1 << 16);
            for k in 0..n {
                pts.push((r, 2.0 * PI * (k as f64 + 0.5) / n as f64 - PI));
            }
            r += h;
        }
        pts
    }

    /// Rough Bessel-step count for a single origin disk of radius `rho`.
    fn direct_cost(&self, rho: f64) -> f64 {
        let (t, e) = (self.p.t, self.p.energy);
        let radial = 20.0 * (t * (6.0 * rho * rho + 6.0 * e + self.um) * rho / PANEL_PHASE + 8.0);
        let per_radius = t * (self.amp_a(rho).abs() + rho * self.um) + 100.0;
        0.5 * radial * per_radius * self.opts.node_factor
    }

    /// Appends `p`, and its mirror image unless `p` is invariant under `xi -> -xi`.
    fn push_with_mirror(patches: &mut Vec<Patch>, mut p: Patch) {
        if p.kind == PatchKind::Origin || p.dth.is_none() {
            patches.push(p);
        } else {
            p.paired = true;
            let m = p.mirror();
            patches.push(p);
            patches.push(m);
        }
    }

    /// Builds the patch set. The set is symmetric under `xi -> -xi`.
    pub fn patches(&self) -> Result<(Vec<Patch>, usize, f64)> {
        let r_cert = self.r_cert();
        // the core of a single disk must contain every jump circle
        let outer = self.special_radii().into_iter().fold(0.0, f64::max) * 2.0 * (1.0 + 1e-9);
        let direct_rho = if self.p.hi.is_finite() { outer } else { r_cert.max(outer) };
        if self.direct_cost(direct_rho) < 3e7 {
            let direct = self.size_patch(PatchKind::Origin, 0.0, 0.0, direct_rho.max(1e-3), &[])?;
            if self.direct_cost(direct.rho) < 3e7 {
                return Ok((vec![direct], 0, r_cert));
            }
        }

        let mut patches: Vec<Patch> = Vec::new();
        if self.p.lo == 0.0 {
            patches.push(self.size_origin());
        }
        for rb in self.special_radii() {
            for th in self.tangential_roots(rb) {
                if coverage(&patches, rb, th).0 == 0.0 {
                    continue;
                }
                let p = self.size_patch(PatchKind::Boundary, rb, th, self.rho_start(rb), &patches)?;
                Self::push_with_mirror(&mut patches, p);
            }
        }

        let grid = self.grid(r_cert);
        for it in 0..self.opts.max_iterations {
            let mut fails: Vec<(f64, f64, f64, bool)> = Vec::new();
            for &(r, th) in &grid {
                let (m, lr, lth) = coverage(&patches, r, th);
                if m == 0.0 {
                    continue;
                }
                let q = self.ratio(r, th, lr, lth);
                if q < 1.0 {
                    fails.push((q, r, th, false));
                }
            }
            for rb in self.special_radii() {
                let n = 8192;
                for k in 0..n {
                    let th = 2.0 * PI * k as f64 / n as f64 - PI;
                    let (m, _, lth) = coverage(&patches, rb, th);
                    if m == 0.0 {
                        continue;
                    }
                    let q = self.tangential_ratio(rb, th, lth);
                    if q < 1.0 {
                        fails.push((q, rb, th, true));
                    }
                }
            }
            if fails.is_empty() {
                return Ok((patches, it, r_cert));
            }
            fails.sort_by(|a, b| a.0.total_cmp(&b.0));
            let before = patches.len();
            for &(_, r, th, on_circle) in fails.iter() {
                if patches.len() - before >= 16 {
                    break;
                }
                if coverage(&patches[before..], r, th).0 == 0.0 {
                    continue;
                }
                let p = if on_circle {
                    let root = wrap(self.newton_tangential(r, th));
                    let th = if coverage(&patches, r, root).0 > 0.0 { root } else { th };
                    self.size_patch(PatchKind::Boundary, r, th, self.rho_start(r), &patches)?
                } else {
                    let here = Complex64::from_polar(r, th);
                    let h = 0.25 * (self.opts.q / (self.p.t * (12.0 * r + 1.0))).sqrt();
                    let target = self
                        .newton_stationary(here)
                        .filter(|z| (z - here).norm() < 8.0 * h.max(0.05 * r))
                        .filter(|z| coverage(&patches, z.norm(), z.arg()).0 > 0.0);
                    match target {
                        Some(z) => self.size_patch(
                            PatchKind::Stationary,
                            z.norm(),
                            z.arg(),
                            self.rho_start(z.norm()),
                            &patches,
                        )?,
                        None => self.size_patch(PatchKind::Certificate, r, th, self.rho_start(r), &patches)?,
                    }
                };
                Self::push_with_mirror(&mut patches, p);
            }
        }
        Err(NvError::ResolutionInsufficient(format!(
            "patch certificate did not close after {} iterations",
            self.opts.max_iterations
        )))
    }

    fn max_abs_deriv(&self, idx: usize, r: f64, w0: f64, width: f64) -> f64 {
        let n = 32;
        (0..=n).map(|k| self.derivs(r, w0 + width * k as f64 / n as f64)[idx].abs()).fold(0.0, f64::max)
    }

    /// Radial nodes `(r, weight)` for patch `p`.
    fn radial_nodes(&self, p: &Patch) -> Vec<(f64, f64)> {
        let (pa, pb) = p.r_range();
        let (a, b) = (pa.max(self.p.lo), pb.min(self.p.hi));
        let mut out = Vec::new();
        if a >= b {
            return out;
        }
        let mut cuts = vec![a];
        for s in self.special_radii() {
            if s > a && s < b {
                cuts.push(s);
            }
        }
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        let (w0, width) = p.window();
        let cap = (pb - pa) / 8.0;
        let gl = GaussLegendre::get(20);
        let k = PANEL_PHASE / (self.p.t * self.opts.node_factor);
        for seg in cuts.windows(2) {
            let (mut r, end) = (seg[0], seg[1]);
            while r < end {
                let d = self.max_abs_deriv(0, r, w0, width);
                let mut h = (k / d).min(end - r).min(cap);
                let d2 = self.max_abs_deriv(0, r + h, w0, width);
                if d2 > d {
                    h = h.min(k / d2);
                }
                if end - (r + h) < 1e-12 * end {
                    h = end - r;
                }
                if r == 0.0 {
                    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                        let s = 0.5 * (1.0 + x);
                        out.push((h * s * s, h * s * w));
                    }
                } else {
                    gl.push_mapped(r, r + h, &mut out);
                }
                r += h;
            }
        }
        out
    }

    /// `int_0^{2 pi} e^{i t S(r, theta)} d theta`, summed from the Jacobi-Anger expansion:
    /// `2 pi sum_n J_n(t A) J_{3n}(t r |u|) e^{3 i n theta_u}`.
    fn angular_mean(&self, r: f64) -> f64 {
        let x = self.p.t * self.amp_a(r);
        let y = self.p.t * r * self.um;
        let nmax = (x.abs().min(y / 3.0) + 30.0 + 8.0 * x.abs().max(y).cbrt()).ceil() as usize;
        let jx = bessel_j_seq(x.abs(), nmax);
        let jy = bessel_j_seq(y, 3 * nmax);
        let sx = if x < 0.0 { -1.0 } else { 1.0 };
        let mut sum = jx[0] * jy[0];
        let mut sgn = 1.0;
        for k in 1..=nmax {
            sgn *= sx;
            sum += 2.0 * sgn * jx[k] * jy[3 * k] * (3.0 * k as f64 * self.ua).cos();
        }
        2.0 * PI * sum
    }

    fn integrate_origin(&self, p: &Patch, budget: &mut f64) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (r, wr) in self.radial_nodes(p) {
            let amp = self.amplitude(r);
            let fr = p.radial(r);
            if amp.norm() == 0.0 || fr == 0.0 {
                continue;
            }
            *budget -= 0.1 * self.p.t * (self.amp_a(r).abs() + r * self.um) + 10.0;
            if *budget < 0.0 {
                return Err(NvError::ResolutionInsufficient("node budget exhausted".into()));
            }
            total += amp * (wr * fr * self.angular_mean(r));
        }
        Ok(total)
    }

    /// Integral of `b_k (1 - b_partner / 2) prod_{j<k} (1 - b_j) f` over patch `k`.
    fn integrate_patch(
        &self,
        k: usize,
        partner: Option<usize>,
        patches: &[Patch],
        budget: &mut f64,
    ) -> Result<Complex64> {
        let p = &patches[k];
        let (w0, width) = p.window();
        let nf = self.opts.node_factor;
        let t = self.p.t;
        let mut total = Complex64::new(0.0, 0.0);
        for (r, wr) in self.radial_nodes(p) {
            let amp = self.amplitude(r);
            let fr = p.radial(r);
            if amp.norm() == 0.0 || fr == 0.0 {
                continue;
            }
            let before: Vec<(f64, &Patch)> = patches[..k]
                .iter()
                .filter_map(|q| {
                    let f = q.radial(r);
                    (f > 0.0).then_some((f, q))
                })
                .collect();
            let half = partner.map(|j| (0.5 * patches[j].radial(r), &patches[j])).filter(|(f, _)| *f > 0.0);
            let d = self.max_abs_deriv(2, r, w0, width) * 1.1;
            let n = (nf * (1.3 * t * d * width / PI + 96.0)).ceil() as usize;
            *budget -= n as f64;
            if *budget < 0.0 {
                return Err(NvError::ResolutionInsufficient("node budget exhausted".into()));
            }
            let dth = width / n as f64;
            let mut ring = Complex64::new(0.0, 0.0);
            'theta: for m in 0..n {
                let th = w0 + (m as f64 + 0.5) * dth;
                let mut wgt = fr * p.angular(th);
                if wgt == 0.0 {
                    continue;
                }
                if let Some((f, q)) = half {
                    wgt *= 1.0 - f * q.angular(th);
                }
                for (f, q) in &before {
                    wgt *= 1.0 - f * q.angular(th);
                    if wgt == 0.0 {
                        continue 'theta;
                    }
                }
                ring += wgt * Complex64::from_polar(1.0, t * self.phase(r, th));
            }
            total += amp * wr * ring * dth;
        }
        Ok(total)
    }

    pub fn run(&self) -> Result<EngineReport> {
        let (patches, iterations, r_cert) = self.patches()?;
        // with a real amplitude f(-xi) = conj f(xi), so a mirror pair costs one patch
        let real = self.p.beta == 0.0;
        let mut budget = self.opts.max_nodes;
        let mut value = Complex64::new(0.0, 0.0);
        let mut patch_nodes = vec![0.0; patches.len()];
        let mut k = 0;
        while k < patches.len() {
            let b0 = budget;
            let p = patches[k];
            if p.kind == PatchKind::Origin {
                debug_assert_eq!(k, 0);
                value += self.integrate_origin(&p, &mut budget)?;
                k += 1;
            } else if p.paired {
                let a = self.integrate_patch(k, Some(k + 1), &patches, &mut budget)?;
                if real {
                    value += 2.0 * a.re;
                } else {
                    value += a + self.integrate_patch(k + 1, Some(k), &patches, &mut budget)?;
                }
                k += 2;
            } else {
                value += self.integrate_patch(k, None, &patches, &mut budget)?;
                k += 1;
            }
            patch_nodes[if p.paired { k - 2 } else { k - 1 }] = b0 - budget;
        }
        if real {
            value.im = 0.0;
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(NvError::ResolutionInsufficient("non-finite quadrature".into()));
        }
        Ok(EngineReport { value, patches, nodes: self.opts.max_nodes - budget, patch_nodes, iterations, r_cert })
    }
}

/// Largest Bessel-step estimate for an origin disk inside a patch set.
const ORIGIN_COST: f64 = 1e7;

/// Phase advance covered by one 20-point Gauss-Legendre panel.
const PANEL_PHASE: f64 = 24.0;

/// `J_0(x), ..., J_nmax(x)` for `x >= 0` by Miller's backward recurrence.
pub(crate) fn bessel_j_seq(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let mut start = nmax.max(x.ceil() as usize) + 30 + (10.0 * x.cbrt()).ceil() as usize;
    start += start % 2;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if k - 1 <= nmax {
            out[k - 1] = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    norm += j;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}
