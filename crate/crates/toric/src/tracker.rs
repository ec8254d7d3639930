//! Corrector-only path tracking along linear homotopies `q_t = g + t f`, with
//! certified step selection, condition-length quadrature, the tail jump for
//! `t → ∞`, and detection of roots escaping to toric infinity.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::condition::{self, certify, mu, newton_displacement, Certificate, ALPHA_STAR};
use crate::error::{Error, Result};
use crate::expsum::{ExpSumSystem, C64};
use crate::polytope::{self, Ray};

/// A family of systems `q_t` with derivative `q̇_t`.
pub trait Homotopy {
    fn at(&self, t: f64) -> ExpSumSystem;
    fn derivative(&self, t: f64) -> ExpSumSystem;
    fn t_start(&self) -> f64;
    /// `None` for a segment running to `t = ∞`.
    fn t_end(&self) -> Option<f64>;
    /// The limit system at `t = ∞`, when `t_end` is `None`.
    fn target(&self) -> ExpSumSystem;
}

/// `q_t = g + t f` on `[t0, t1]`, or on `[t0, ∞)` when `t1` is `None`.
#[derive(Debug, Clone)]
pub struct LinearSegment {
    pub g: ExpSumSystem,
    pub f: ExpSumSystem,
    pub t0: f64,
    pub t1: Option<f64>,
}

impl LinearSegment {
    pub fn to_infinity(g: ExpSumSystem, f: ExpSumSystem) -> Self {
        LinearSegment { g, f, t0: 0.0, t1: None }
    }
}

impl Homotopy for LinearSegment {
    fn at(&self, t: f64) -> ExpSumSystem {
        // (g + t f)/(1+t) keeps magnitudes bounded for large t
        let s = 1.0 / (1.0 + t);
        let mut q = self.g.axpy(t, &self.f);
        for c in q.coeffs.iter_mut().flatten() {
            *c *= s;
        }
        q
    }

    fn derivative(&self, t: f64) -> ExpSumSystem {
        // d/dt (g + t f)/(1+t) = (f - g)/(1+t)^2
        let s = 1.0 / ((1.0 + t) * (1.0 + t));
        let mut d = self.f.axpy(-1.0, &self.g);
        for c in d.coeffs.iter_mut().flatten() {
            *c *= s;
        }
        d
    }

    fn t_start(&self) -> f64 {
        self.t0
    }

    fn t_end(&self) -> Option<f64> {
        self.t1
    }

    fn target(&self) -> ExpSumSystem {
        self.f.clone()
    }
}

/// `q_t ≡ q` on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct ConstantPath {
    pub q: ExpSumSystem,
    pub t0: f64,
    pub t1: f64,
}

impl Homotopy for ConstantPath {
    fn at(&self, _t: f64) -> ExpSumSystem {
        self.q.clone()
    }
    fn derivative(&self, _t: f64) -> ExpSumSystem {
        self.q.axpy(-1.0, &self.q)
    }
    fn t_start(&self) -> f64 {
        self.t0
    }
    fn t_end(&self) -> Option<f64> {
        Some(self.t1)
    }
    fn target(&self) -> ExpSumSystem {
        self.q.clone()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub alpha_star: f64,
    pub step_growth: f64,
    pub bisection_tol: f64,
    pub probes: usize,
    pub max_steps: usize,
    /// Toric infinity threshold on `‖Re x‖_∞`.
    pub h_infinity: f64,
    pub refine: usize,
    /// Estimate of `μ` at the target roots for the tail threshold.
    pub mu_f_estimate: Option<f64>,
    /// How many times the tail threshold may be quadrupled after a failed jump.
    pub tail_extensions: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            alpha_star: ALPHA_STAR,
            step_growth: 2.0,
            bisection_tol: 1e-3,
            probes: 8,
            max_steps: 100_000,
            h_infinity: 60.0,
            refine: 4,
            mu_f_estimate: None,
            tail_extensions: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshPoint {
    pub t: f64,
    pub x: Vec<C64>,
    pub beta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityCertificate {
    pub ray: Ray,
    pub h: Vec<Vec<C64>>,
    pub relative_norms: Vec<f64>,
    pub bounds: Vec<f64>,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    InfinityDiverged(Option<InfinityCertificate>),
    StepStalled(f64),
    BudgetExceeded,
    SingularJacobian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathTrace {
    pub mesh: Vec<MeshPoint>,
    pub steps: usize,
    pub l_hat: f64,
    pub l1_hat: f64,
    pub l2_hat: f64,
    /// Tail threshold used for segments running to infinity.
    pub tail_t: Option<f64>,
    pub outcome: Outcome,
    /// Root of the end system after the final Newton step.
    pub end_point: Option<Vec<C64>>,
    pub end_certificate: Option<Certificate>,
}

impl PathTrace {
    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, Outcome::Success)
    }
}

/// `K = 1 + √((log n + log 10)/min S_i)`.
pub fn k_constant(n: usize, min_si: usize) -> f64 {
    1.0 + (((n as f64).ln() + 10f64.ln()) / min_si as f64).sqrt()
}

/// Tail threshold `T = 14 κ_f K √n √S μ² ν` for the target `f`.
pub fn tail_threshold(f: &ExpSumSystem, mu_f: f64) -> Result<f64> {
    let kf = f.kappa_f();
    if !kf.is_finite() {
        return Err(Error::InfiniteKappa);
    }
    let st = &f.supports;
    let n = st.n;
    let min_si = (0..n).map(|i| st.size(i)).min().unwrap();
    let k = k_constant(n, min_si);
    Ok(14.0 * kf * k * (n as f64).sqrt() * (st.total_size() as f64).sqrt() * mu_f * mu_f * st.nu0()?)
}

/// Infinity threshold
/// `H = (n/η) log(16e δ⁻¹ d_r² S √max S_i (1 + T‖f‖√e/(δ^{1/(2S)}√S)))`.
#[allow(clippy::too_many_arguments)]
pub fn h_threshold(
    n: usize,
    eta: f64,
    dr: f64,
    s: usize,
    max_si: usize,
    t: f64,
    delta: f64,
    norm_f: f64,
) -> Result<f64> {
    let max = default_delta(dr, s);
    if delta > max * (1.0 + 1e-12) {
        return Err(Error::DeltaTooLarge { delta, max });
    }
    if !(eta > 0.0) {
        return Err(Error::ZeroEta);
    }
    let sf = s as f64;
    let e = std::f64::consts::E;
    let inner = 1.0 + t * norm_f * e.sqrt() / (delta.powf(1.0 / (2.0 * sf)) * sf.sqrt());
    Ok(n as f64 / eta * (16.0 * e / delta * dr * dr * sf * (max_si as f64).sqrt() * inner).ln())
}

/// `δ = 1/(2(2d_r²+1)S)`.
pub fn default_delta(dr: f64, s: usize) -> f64 {
    1.0 / (2.0 * (2.0 * dr * dr + 1.0) * s as f64)
}

fn alpha_hat(q: &ExpSumSystem, x: &[C64], nu: f64) -> f64 {
    match condition::beta(q, x) {
        Ok(b) => 0.5 * b * mu(q, x) * nu,
        Err(_) => f64::INFINITY,
    }
}

/// Largest `t` in `(t_j, t_max]` reached by geometric growth then bisection
/// before the certificate quantity for `x_next` reaches `α*`.
pub fn step_search<P: Homotopy>(
    path: &P,
    x_next: &[C64],
    t_j: f64,
    t_max: f64,
    h0: f64,
    config: &TrackerConfig,
) -> f64 {
    let nu = path.at(t_j).supports.nu0().unwrap_or(f64::INFINITY);
    let ok = |t: f64| alpha_hat(&path.at(t), x_next, nu) < config.alpha_star;
    let mut lo = t_j;
    let mut h = h0.max(1e-12 * (1.0 + t_j.abs()));
    loop {
        let hi = (t_j + h).min(t_max);
        let mut bad = None;
        for k in 1..=config.probes {
            let t = lo + (hi - lo) * k as f64 / config.probes as f64;
            if ok(t) {
                lo = t;
            } else {
                bad = Some(t);
                break;
            }
        }
        match bad {
            None if hi >= t_max => return t_max,
            None => h *= config.step_growth,
            Some(mut b) => {
                while b - lo > config.bisection_tol * (b - t_j) {
                    let m = 0.5 * (lo + b);
                    if ok(m) {
                        lo = m;
                    } else {
                        b = m;
                    }
                }
                return lo;
            }
        }
    }
}

/// Root of `q` near `x` by a few Newton steps.
fn correct(q: &ExpSumSystem, x: &[C64], iters: usize) -> Vec<C64> {
    let mut y = x.to_vec();
    for _ in 0..iters {
        match newton_displacement(q, &y) {
            Ok(d) => {
                let small = q.supports.norm0(d.as_slice()) < 1e-15;
                y = y.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
                if small {
                    break;
                }
            }
            Err(_) => break,
        }
    }
    y
}

/// Projective norm of `v` at `p`, equation by equation.
fn projective_speed(p: &[Vec<C64>], v: &[Vec<C64>]) -> f64 {
    let mut s = 0.0;
    for (pi, vi) in p.iter().zip(v) {
        let np: f64 = pi.iter().map(|x| x.norm_sqr()).sum();
        let ip: C64 = pi.iter().zip(vi).map(|(a, b)| a.conj() * b).sum();
        let lam = ip / np;
        let r: f64 = pi.iter().zip(vi).map(|(a, b)| (b - a * lam).norm_sqr()).sum();
        s += r / np;
    }
    s.sqrt()
}

/// Integrands `(μ(‖ṗ‖_p + ν‖ż‖_0), μ‖q̇·R(z)‖_p, 2νμ‖ż‖_0)` at parameter `t` and root `z`.
fn integrand<P: Homotopy>(path: &P, t: f64, z: &[C64], nu: f64) -> (f64, f64, f64) {
    let q = path.at(t);
    let qd = path.derivative(t);
    let st = &q.supports;
    let (val, _, _) = qd.value_and_jacobian(z);
    let (_, jq, _) = q.value_and_jacobian(z);
    // both evaluations carry the same e^{-ℓ_i(z)} row scaling
    let zdot: DVector<C64> = match jq.lu().solve(&(-val)) {
        Some(v) => v,
        None => return (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    let p = q.renormalize(z);
    let pr = qd.renormalize(z);
    // ṗ_ia = q̇_ia e^{b z} + q_ia e^{b z} (b·ż), scaled like p
    let pdot: Vec<Vec<C64>> = (0..st.n)
        .map(|i| {
            st.shifted(i)
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    let bz: C64 = b.iter().zip(zdot.iter()).map(|(x, y)| y * x).sum();
                    pr.coeffs[i][k] + p.coeffs[i][k] * bz
                })
                .collect()
        })
        .collect();
    // renormalize uses the same scale for q and q̇ (ℓ depends on z only)
    let m = mu(&q, z);
    let zn = st.norm0(zdot.as_slice());
    let sp = projective_speed(&p.coeffs, &pdot);
    let s1 = projective_speed(&p.coeffs, &pr.coeffs);
    (m * (sp + nu * zn), m * s1, 2.0 * nu * m * zn)
}

/// Trapezoid estimates of `(L, L1, L2)` on the mesh refined `refine` times.
pub fn condition_length<P: Homotopy>(path: &P, mesh: &[MeshPoint], refine: usize) -> (f64, f64, f64) {
    let nu = path.at(path.t_start()).supports.nu0().unwrap_or(f64::INFINITY);
    let (mut l, mut l1, mut l2) = (0.0, 0.0, 0.0);
    for w in mesh.windows(2) {
        let (a, b) = (w[0].t, w[1].t);
        if b <= a {
            continue;
        }
        let mut prev: Option<(f64, f64, f64)> = None;
        let mut z = w[1].x.clone();
        for k in 0..=refine {
            let t = a + (b - a) * k as f64 / refine as f64;
            z = correct(&path.at(t), &z, 4);
            let cur = integrand(path, t, &z, nu);
            if let Some(p) = prev {
                let h = (b - a) / refine as f64;
                l += 0.5 * h * (p.0 + cur.0);
                l1 += 0.5 * h * (p.1 + cur.1);
                l2 += 0.5 * h * (p.2 + cur.2);
            }
            prev = Some(cur);
        }
    }
    (l, l1, l2)
}

/// Faces `A_i^ξ` as index lists for a real direction.
fn faces_for(points: &[Vec<Vec<i64>>], x: &[f64]) -> Vec<Vec<usize>> {
    points
        .iter()
        .map(|a| {
            let vals: Vec<f64> = a
                .iter()
                .map(|p| p.iter().zip(x).map(|(&u, v)| u as f64 * v).sum())
                .collect();
            let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let span = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let tol = 1e-9 * (1.0 + m.abs().max(span.abs()));
            (0..a.len()).filter(|&k| vals[k] >= m - tol).collect()
        })
        .collect()
}

/// Dominant ray in a nonnegative decomposition of `x` over the rays whose
/// faces contain the faces of `x`.
fn dominant_ray(rays: &[Ray], points: &[Vec<Vec<i64>>], x: &[f64]) -> Ray {
    let n = x.len();
    let fx = faces_for(points, x);
    let cone: Vec<&Ray> = rays
        .iter()
        .filter(|r| {
            let fr = faces_for(points, &r.unit());
            fx.iter().zip(&fr).all(|(a, b)| a.iter().all(|k| b.contains(k)))
        })
        .collect();
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut best: Option<(f64, &Ray)> = None;
    let m = cone.len();
    for size in 1..=n.min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let cols: Vec<Vec<f64>> = idx.iter().map(|&k| cone[k].unit()).collect();
            let a = nalgebra::DMatrix::from_fn(n, size, |r, c| cols[c][r]);
            let b = nalgebra::DVector::from_column_slice(x);
            if let Ok(s) = a.clone().svd(true, true).solve(&b, 1e-12) {
                let res = (&a * &s - &b).norm();
                if res <= 1e-8 * (1.0 + xn) && s.iter().all(|&v| v >= -1e-9 * (1.0 + xn)) {
                    let (k, &smax) = s.iter().enumerate().fold((0, &f64::NEG_INFINITY), |acc, (k, v)| {
                        if *v > *acc.1 {
                            (k, v)
                        } else {
                            acc
                        }
                    });
                    if best.map_or(true, |(v, _)| smax > v) {
                        best = Some((smax, cone[idx[k]]));
                    }
                }
            }
            // next combination
            let mut p = size;
            let mut advanced = false;
            while p > 0 {
                p -= 1;
                if idx[p] < m - size + p {
                    idx[p] += 1;
                    for r in p + 1..size {
                        idx[r] = idx[r - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    match best {
        Some((_, r)) => r.clone(),
        None => rays
            .iter()
            .max_by(|a, b| {
                let da: f64 = a.unit().iter().zip(x).map(|(u, v)| u * v).sum();
                let db: f64 = b.unit().iter().zip(x).map(|(u, v)| u * v).sum();
                da.total_cmp(&db)
            })
            .expect("fan has rays")
            .clone(),
    }
}

/// Perturbation `h` putting a root of `q + h` at toric infinity in the
/// direction of the dominant ray of `Re z`, when `‖Re z‖_2 ≥ H`.
pub fn infinity_monitor(q: &ExpSumSystem, z: &[C64], h_thr: f64) -> Option<InfinityCertificate> {
    let x: Vec<f64> = z.iter().map(|c| c.re).collect();
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if xn < h_thr {
        return None;
    }
    let st = &q.supports;
    let n = st.n;
    let pts = st.points();
    let rays = polytope::fan_rays(pts).ok()?;
    let ray = dominant_ray(&rays, pts, &x);
    let all = polytope::facet_gap_lenient(pts, &rays);
    let mut h = Vec::with_capacity(n);
    let mut rel = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    for i in 0..n {
        let (v, _, _) = st.veronese(i, z);
        let (_, face) = polytope::support_value(&pts[i], &ray.xi);
        let on: Vec<bool> = pts[i].iter().map(|p| face.contains(p)).collect();
        let g: C64 = -(0..v.len()).filter(|&k| on[k]).map(|k| q.coeffs[i][k] * v[k]).sum::<C64>();
        let den: f64 = (0..v.len()).filter(|&k| on[k]).map(|k| v[k].norm_sqr()).sum();
        let hi: Vec<C64> = (0..v.len())
            .map(|k| if on[k] { g * v[k].conj() / den } else { C64::new(0.0, 0.0) })
            .collect();
        let hn = hi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let qn = q.coeffs[i].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        rel.push(hn / qn);
        let eta_i = all.eta_i[i].map_or(f64::INFINITY, |g| g.value());
        bounds.push(st.kappa_rho(i) * (-eta_i * h_thr / n as f64).exp());
        h.push(hi);
    }
    let within_bound = rel.iter().zip(&bounds).all(|(r, b)| *r <= b * (1.0 + 1e-9) + 1e-300);
    Some(InfinityCertificate { ray, h, relative_norms: rel, bounds, within_bound })
}

/// Follow the recurrence `x_{j+1} = N(q_{t_j}, x_j)`, `t_{j+1}` from the step
/// search, until `t = T`; then one Newton step at the end system.
pub fn track<P: Homotopy>(path: &P, x0: &[C64], config: &TrackerConfig) -> PathTrace {
    let t0 = path.t_start();
    let q0 = path.at(t0);
    let mut mesh = vec![MeshPoint {
        t: t0,
        x: x0.to_vec(),
        beta: condition::beta(&q0, x0).unwrap_or(f64::INFINITY),
        mu: mu(&q0, x0),
    }];
    let target = path.target();
    let mut extensions = 0usize;
    let mut tail_scale = 1.0;
    let mut steps = 0usize;
    let mut x = x0.to_vec();
    let mut t = t0;
    let mut h = match path.t_end() {
        Some(t1) => (t1 - t0) / 64.0,
        None => 0.05,
    };
    let finish = |mesh: Vec<MeshPoint>, steps, tail_t, outcome, end: Option<(Vec<C64>, Certificate)>| {
        let (l, l1, l2) = condition_length(path, &mesh, config.refine);
        let (end_point, end_certificate) = match end {
            Some((p, c)) => (Some(p), Some(c)),
            None => (None, None),
        };
        PathTrace { mesh, steps, l_hat: l, l1_hat: l1, l2_hat: l2, tail_t, outcome, end_point, end_certificate }
    };
    loop {
        let q = path.at(t);
        let x_next = match condition::newton_step(&q, &x) {
            Ok(y) => y,
            Err(_) => return finish(mesh, steps, None, Outcome::SingularJacobian, None),
        };
        let t_max = match path.t_end() {
            Some(t1) => t1,
            None => {
                let m = config.mu_f_estimate.unwrap_or(mesh.last().unwrap().mu).max(1.0);
                match tail_threshold(&target, m) {
                    Ok(v) => (v * tail_scale).max(t),
                    Err(_) => return finish(mesh, steps, None, Outcome::SingularJacobian, None),
                }
            }
        };
        let t_next = step_search(path, &x_next, t, t_max, h, config);
        steps += 1;
        if t_next - t <= 1e-14 * (1.0 + t.abs()) && t_next < t_max {
            return finish(mesh, steps, None, Outcome::StepStalled(t), None);
        }
        h = t_next - t;
        t = t_next;
        x = x_next;
        let qt = path.at(t);
        mesh.push(MeshPoint {
            t,
            x: x.clone(),
            beta: condition::beta(&qt, &x).unwrap_or(f64::INFINITY),
            mu: mu(&qt, &x),
        });
        let re_inf = x.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        if re_inf >= config.h_infinity {
            let cert = infinity_monitor(&qt, &x, config.h_infinity);
            return finish(mesh, steps, None, Outcome::InfinityDiverged(cert), None);
        }
        if steps >= config.max_steps {
            return finish(mesh, steps, None, Outcome::BudgetExceeded, None);
        }
        if t >= t_max {
            let end_sys = if path.t_end().is_some() { qt.clone() } else { target.clone() };
            let tail_t = path.t_end().is_none().then_some(t);
            match condition::newton_step(&end_sys, &x) {
                Ok(y) => {
                    let c = certify(&end_sys, &y, config.alpha_star);
                    if c.passed {
                        return finish(mesh, steps, tail_t, Outcome::Success, Some((y, c)));
                    }
                }
                Err(_) => {}
            }
            if path.t_end().is_some() || extensions >= config.tail_extensions {
                return finish(mesh, steps, tail_t, Outcome::StepStalled(t), None);
            }
            extensions += 1;
            tail_scale *= 4.0;
        }
    }
}
