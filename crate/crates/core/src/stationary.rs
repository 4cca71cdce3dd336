//! Critical points of the reduced phase `S(u, lambda)` at unit energy.
//!
//! With `zeta = lambda^2` the critical points solve the self-inversive cubic
//! `zeta^3 - (conj(u)/6) zeta^2 + (u/6) zeta - 1 = 0`; its roots are either all unimodular
//! or one unimodular root plus a pair `(zeta, 1/conj(zeta))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::{Complex64, ComplexPoint};

/// `sqrt(sqrt(2) + 1)`: radius of the ball in which the distance lemmas apply.
pub const K_RADIUS: f64 = 1.553_773_974_030_037_3;

/// Relative tolerance on the discriminant for the on-curve classification.
pub const CURVE_TOL: f64 = 1e-11;
/// Tolerance on `|(conj(u)/18)^3 - 1|` for the triple-root classification.
pub const TRIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    /// Case 1: a vertex of the curve, triple root.
    TripleDegenerate,
    /// Case 2: on the curve, double root.
    OnCurve,
    /// Case 3: inside, three distinct unimodular roots.
    InteriorNondegenerate,
    /// Case 4: outside, one root pair off the unit circle.
    Exterior,
}

impl CaseTag {
    pub fn number(self) -> u8 {
        match self {
            CaseTag::TripleDegenerate => 1,
            CaseTag::OnCurve => 2,
            CaseTag::InteriorNondegenerate => 3,
            CaseTag::Exterior => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::TripleDegenerate => "TripleDegenerate",
            CaseTag::OnCurve => "OnCurve",
            CaseTag::InteriorNondegenerate => "InteriorNondegenerate",
            CaseTag::Exterior => "Exterior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UCurveSample {
    pub phi: f64,
    pub point: ComplexPoint,
}

/// The curve `6 (2 e^{-i phi} + e^{2 i phi})` bounding the region of unimodular roots.
pub fn u_curve(phi: f64) -> UCurveSample {
    let point = 6.0 * (2.0 * Complex64::from_polar(1.0, -phi) + Complex64::from_polar(1.0, 2.0 * phi));
    UCurveSample { phi, point }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPointSet {
    pub u_tilde: ComplexPoint,
    pub lambdas: [ComplexPoint; 6],
    pub case_tag: CaseTag,
    pub omega: f64,
    pub phi: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub pair1: (usize, usize),
    pub pair2: (usize, usize),
}

/// Cubic `Q(u, zeta)`.
pub fn cubic(u: ComplexPoint, z: Complex64) -> Complex64 {
    ((z - u.conj() / 6.0) * z + u / 6.0) * z - 1.0
}

fn cubic_derivative(u: ComplexPoint, z: Complex64) -> Complex64 {
    (3.0 * z - u.conj() / 3.0) * z + u / 6.0
}

/// Residual of the cubic relative to the size of its terms.
pub fn cubic_residual(u: ComplexPoint, z: Complex64) -> f64 {
    let a = z.norm();
    let scale = a * a * a + u.norm() / 6.0 * (a * a + a) + 1.0;
    cubic(u, z).norm() / scale
}

/// Discriminant of the cubic; real, negative strictly inside the curve, positive outside.
pub fn discriminant(u: ComplexPoint) -> f64 {
    let m2 = u.norm_sqr();
    let u3 = u * u * u;
    m2 / 2.0 - u3.re / 27.0 + m2 * m2 / 1296.0 - 27.0
}

fn discriminant_scale(u: ComplexPoint) -> f64 {
    let m = u.norm();
    27.0 + m * m / 2.0 + m * m * m / 27.0 + m.powi(4) / 1296.0
}

fn polish(u: ComplexPoint, mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let f = cubic(u, z);
        let d = cubic_derivative(u, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = f / d;
        let cand = z - step;
        if cubic(u, cand).norm() < f.norm() {
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// The three roots of the cubic by Cardano's formula followed by Newton polishing.
pub fn roots_zeta(u_tilde: ComplexPoint) -> [Complex64; 3] {
    let u = u_tilde;
    let a = -u.conj() / 6.0;
    let b = u / 6.0;
    let c = Complex64::new(-1.0, 0.0);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let w1 = -q / 2.0 + disc;
    let w2 = -q / 2.0 - disc;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    if w.norm() == 0.0 {
        roots = [shift; 3];
    } else {
        let cbrt = w.powf(1.0 / 3.0);
        let mut rot = Complex64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let y = rot * cbrt;
            *r = y - p / (3.0 * y) + shift;
            rot *= omega;
        }
    }
    for r in roots.iter_mut() {
        *r = polish(u, *r);
    }
    roots
}

/// Membership in the closed region bounded by the curve, via the root classification.
pub fn in_u(u_tilde: ComplexPoint) -> bool {
    classify(u_tilde) != CaseTag::Exterior
}

/// Case classification from the discriminant sign and a coefficient test for the vertices.
pub fn classify(u: ComplexPoint) -> CaseTag {
    let z0 = u.conj() / 18.0;
    if (z0 * z0 * z0 - 1.0).norm() <= TRIPLE_TOL {
        return CaseTag::TripleDegenerate;
    }
    let d = discriminant(u) / discriminant_scale(u);
    if d.abs() <= CURVE_TOL {
        CaseTag::OnCurve
    } else if d < 0.0 {
        CaseTag::InteriorNondegenerate
    } else {
        CaseTag::Exterior
    }
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

/// The six critical points with their classification and distance data.
pub fn stationary_set(u_tilde: ComplexPoint) -> StationaryPointSet {
    let u = u_tilde;
    let case_tag = classify(u);
    let roots = roots_zeta(u);
    let (l0, l1, l2) = match case_tag {
        CaseTag::TripleDegenerate => {
            let z = unit(u.conj() / 18.0);
            let mut l = z.sqrt();
            if (l * l * l).re < 0.0 {
                l = -l;
            }
            (l, l, l)
        }
        CaseTag::OnCurve => {
            let (i, j) = closest_pair(&roots);
            let zd = unit(0.5 * (roots[i] + roots[j]));
            let l0 = zd.sqrt();
            (l0, Complex64::new(1.0, 0.0) / (l0 * l0), l0)
        }
        CaseTag::InteriorNondegenerate => {
            let z: Vec<Complex64> = roots.iter().map(|&r| unit(r)).collect();
            let (i, j) = closest_pair(&roots);
            let (a, b) = if z[i].arg() <= z[j].arg() { (i, j) } else { (j, i) };
            let l0 = z[a].sqrt();
            let mut l2 = z[b].sqrt();
            if (l2 - l0).norm() > (l2 + l0).norm() {
                l2 = -l2;
            }
            (l0, Complex64::new(1.0, 0.0) / (l0 * l2), l2)
        }
        CaseTag::Exterior => {
            let mut big = roots[0];
            for r in &roots[1..] {
                if r.norm() > big.norm() {
                    big = *r;
                }
            }
            let big = polish(u, big);
            let l0 = big.sqrt();
            let l2 = Complex64::new(1.0, 0.0) / l0.conj();
            (l0, l0.conj() / l0, l2)
        }
    };
    let lambdas = [l0, l1, l2, -l0, -l1, -l2];
    let omega = if case_tag == CaseTag::Exterior { l0.norm() - 1.0 } else { 0.0 };
    let phi = 2.0 * l0.arg();
    let d = omega_distances(&lambdas);
    StationaryPointSet {
        u_tilde: u,
        lambdas,
        case_tag,
        omega,
        phi,
        omega1: d.omega1,
        omega2: d.omega2,
        pair1: d.pair1,
        pair2: d.pair2,
    }
}

fn closest_pair(r: &[Complex64; 3]) -> (usize, usize) {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut best = pairs[0];
    let mut bd = f64::INFINITY;
    for &(i, j) in &pairs {
        let d = (r[i] - r[j]).norm();
        if d < bd {
            bd = d;
            best = (i, j);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaDistances {
    pub omega1: f64,
    pub omega2: f64,
    pub pair1: (usize, usize),
    pub pair2: (usize, usize),
}

/// Distances closer than this (relative) are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

fn argmin_pairs(l: &[ComplexPoint; 6], skip: &[(usize, usize)]) -> (f64, (usize, usize)) {
    let mut best = f64::INFINITY;
    let mut pair = (0, 0);
    for i in 0..6 {
        for j in (i + 1)..6 {
            if skip.contains(&(i, j)) {
                continue;
            }
            let d = (l[i] - l[j]).norm();
            if best.is_infinite() || d < best - TIE_TOL * (1.0 + best) {
                best = d;
                pair = (i, j);
            }
        }
    }
    (best, pair)
}

/// First and second minimal distances between critical points, excluding `(2, 5)`.
pub fn omega_distances(lambdas: &[ComplexPoint; 6]) -> OmegaDistances {
    let (omega1, pair1) = argmin_pairs(lambdas, &[(2, 5)]);
    let (a, b) = ((pair1.0 + 3) % 6, (pair1.1 + 3) % 6);
    let anti = (a.min(b), a.max(b));
    let (omega2, pair2) = argmin_pairs(lambdas, &[(2, 5), pair1, anti]);
    OmegaDistances { omega1, omega2, pair1, pair2 }
}

/// Derivative of the reduced phase, `conj(u)/2 - u/(2 l^2) - 3 l^2 + 3/l^4`.
pub fn s_lambda(u: ComplexPoint, l: Complex64) -> Complex64 {
    let l2 = l * l;
    u.conj() / 2.0 - u / (2.0 * l2) - 3.0 * l2 + 3.0 / (l2 * l2)
}

/// The factorised form `-(3/l^4) prod (l^2 - lambda_j^2)`.
pub fn s_lambda_factored(sps: &StationaryPointSet, l: Complex64) -> Complex64 {
    let l2 = l * l;
    let mut p = Complex64::new(-3.0, 0.0) / (l2 * l2);
    for j in 0..3 {
        p *= l2 - sps.lambdas[j] * sps.lambdas[j];
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub omega_order_ok: bool,
    pub base_point: Option<(usize, usize, usize)>,
    pub cluster_j1_ok: bool,
    pub cluster_j2_ok: bool,
    /// Largest `|lambda_i - lambda_j| / omega2` within either cluster.
    pub cluster_constant: Option<f64>,
    pub all_in_k_ball: bool,
    /// `max_j dist(lambda_j, S^1) / omega1`.
    pub circle_ratio: Option<f64>,
    /// `max_j min_k |lambda_j - e^{-i pi k/3}| / omega2`.
    pub degenerate_ratio: Option<f64>,
}

impl LemmaReport {
    pub fn passes(&self) -> bool {
        self.omega_order_ok && self.base_point.is_some() && self.cluster_j1_ok
    }
}

/// Measures the distance lemmas on one set of critical points.
pub fn verify_lemmas(sps: &StationaryPointSet) -> LemmaReport {
    let l = &sps.lambdas;
    let (w1, w2) = (sps.omega1, sps.omega2);
    let tol = 1e-10;
    let omega_order_ok = w1 <= w2 + tol && w2 < 2.0;
    let mut base_point = None;
    'outer: for j0 in 0..6 {
        for j1 in 0..6 {
            if j1 == j0 || ((l[j0] - l[j1]).norm() - w1).abs() > tol {
                continue;
            }
            for j2 in 0..6 {
                if j2 == j0 || j2 == j1 {
                    continue;
                }
                if ((l[j0] - l[j2]).norm() - w2).abs() <= tol {
                    base_point = Some((j0, j1, j2));
                    break 'outer;
                }
            }
        }
    }
    let (mut j1_ok, mut j2_ok, mut cmax) = (false, false, None);
    if let Some((a, b, c)) = base_point {
        let set1 = [a, b, c];
        let set2: Vec<usize> = (0..6).filter(|k| !set1.contains(k)).collect();
        let spread = |s: &[usize]| {
            let mut m: f64 = 0.0;
            for &i in s {
                for &j in s {
                    m = m.max((l[i] - l[j]).norm());
                }
            }
            m
        };
        let (s1, s2) = (spread(&set1), spread(&set2));
        j1_ok = s1 <= 2.0 * w2 + tol;
        j2_ok = s2 <= 2.0 * w2 + tol;
        if w2 > tol {
            cmax = Some(s1.max(s2) / w2);
        }
    }
    let all_in_k_ball = l.iter().all(|z| z.norm() < K_RADIUS);
    let circle_ratio = (w1 > tol).then(|| l.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max) / w1);
    let degenerate_ratio = (w2 > tol).then(|| {
        l.iter()
            .map(|z| {
                (0..6)
                    .map(|k| (z - Complex64::from_polar(1.0, -PI * k as f64 / 3.0)).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            / w2
    });
    LemmaReport {
        omega_order_ok,
        base_point,
        cluster_j1_ok: j1_ok,
        cluster_j2_ok: j2_ok,
        cluster_constant: cmax,
        all_in_k_ball,
        circle_ratio,
        degenerate_ratio,
    }
}
