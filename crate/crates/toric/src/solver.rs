//! Randomized cheater's homotopy: sample a Gaussian intermediate system, track
//! every start root through it to the target, and retry with a larger
//! Newton-step budget on failure.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::condition::{certify, newton_displacement, refine, relative_residual, Certificate, ALPHA_STAR};
use crate::error::{Error, Result};
use crate::expsum::{ExpSumSystem, SupportTuple, C64};
use crate::oracle;
use crate::polytope;
use crate::tracker::{self, k_constant, track, LinearSegment, PathTrace, TrackerConfig};

/// Complex Gaussian coefficients with `E|g_ia|² = 1`.
pub fn sample_gaussian<R: Rng + ?Sized>(supports: &Arc<SupportTuple>, rng: &mut R) -> ExpSumSystem {
    let nd = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let coeffs = (0..supports.n)
        .map(|i| (0..supports.size(i)).map(|_| C64::new(nd.sample(rng), nd.sample(rng))).collect())
        .collect();
    ExpSumSystem::new(supports.clone(), coeffs).expect("shapes match")
}

/// `sample_gaussian` driven by a ChaCha8 generator seeded with `seed`.
pub fn sample_gaussian_seeded(supports: &Arc<SupportTuple>, seed: u64) -> ExpSumSystem {
    sample_gaussian(supports, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionFlags {
    pub in_lambda_eps: bool,
    pub in_y_k: bool,
}

/// `ε = π/(72S)`.
pub fn default_epsilon(s: usize) -> f64 {
    PI / (72.0 * s as f64)
}

/// Membership of `g` in `Λ_ε` (relative to `f`) and in `Y_K`.
pub fn exclusion_check_with(g: &ExpSumSystem, f: &ExpSumSystem, eps: f64, k: f64) -> Result<ExclusionFlags> {
    let mut lam = false;
    for (i, (gi, fi)) in g.coeffs.iter().zip(&f.coeffs).enumerate() {
        for (a, (x, y)) in gi.iter().zip(fi).enumerate() {
            if y.norm() == 0.0 {
                return Err(Error::ZeroCoefficient(i, a));
            }
            if (x / y).arg().abs() >= PI - eps {
                lam = true;
            }
        }
    }
    let yk = g
        .norms()
        .iter()
        .enumerate()
        .any(|(i, nrm)| *nrm >= k * (g.supports.size(i) as f64).sqrt());
    Ok(ExclusionFlags { in_lambda_eps: lam, in_y_k: yk })
}

pub fn exclusion_check(g: &ExpSumSystem, f: &ExpSumSystem) -> Result<ExclusionFlags> {
    let st = &f.supports;
    let min_si = (0..st.n).map(|i| st.size(i)).min().unwrap();
    exclusion_check_with(g, f, default_epsilon(st.total_size()), k_constant(st.n, min_si))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub seed: u64,
    /// Initial Newton-step budget for one attempt; 1000 per expected root
    /// when absent.
    pub n0: Option<f64>,
    pub growth: f64,
    pub alpha_star: f64,
    pub max_attempts: usize,
    pub threads: usize,
    /// Overrides the infinity threshold derived from the invariants.
    pub h_override: Option<f64>,
    pub multistart_tries: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            seed: 0,
            n0: None,
            growth: std::f64::consts::SQRT_2,
            alpha_star: ALPHA_STAR,
            max_attempts: 12,
            threads: 1,
            h_override: None,
            multistart_tries: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedRoot {
    pub point: Vec<C64>,
    pub certificate: Certificate,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedSolutionSet {
    pub roots: Vec<CertifiedRoot>,
    pub expected_count: i64,
}

/// Summary of one tracked path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSummary {
    pub steps: usize,
    pub l_hat: f64,
    pub l1_hat: f64,
    pub l2_hat: f64,
    pub success: bool,
}

impl From<&PathTrace> for PathSummary {
    fn from(t: &PathTrace) -> Self {
        PathSummary { steps: t.steps, l_hat: t.l_hat, l1_hat: t.l1_hat, l2_hat: t.l2_hat, success: t.succeeded() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub newton_steps: usize,
    pub attempts: usize,
    pub final_budget: f64,
    pub resamples: usize,
    pub paths: Vec<PathSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solution: CertifiedSolutionSet,
    pub stats: SolveStats,
}

/// Invariants reused by every attempt on one support tuple.
#[derive(Debug, Clone)]
pub struct SolverContext {
    pub bkk: i64,
    pub h_infinity: f64,
}

impl SolverContext {
    /// `H` from the invariants with the default `δ`; the tail threshold inside
    /// is evaluated with `μ = 10`, since `H` depends on it only logarithmically.
    pub fn new(f: &ExpSumSystem, h_override: Option<f64>) -> Result<Self> {
        let st = &f.supports;
        let pts = st.points();
        let bkk = polytope::bkk_count(pts)?;
        let h_infinity = match h_override {
            Some(h) => h,
            None => {
                let rays = polytope::fan_rays(pts)?;
                let eta = polytope::facet_gap_lenient(pts, &rays).eta.map_or(1.0, |g| g.value());
                let dr = polytope::dr_bound(pts)?;
                let s = st.total_size();
                let max_si = (0..st.n).map(|i| st.size(i)).max().unwrap();
                let t = tracker::tail_threshold(f, 10.0).unwrap_or(1e6);
                let delta = tracker::default_delta(dr, s);
                tracker::h_threshold(st.n, eta, dr, s, max_si, t, delta, (s as f64).sqrt())?
            }
        };
        Ok(SolverContext { bkk, h_infinity })
    }
}

fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(items: &[T], threads: usize, f: F) -> Vec<U> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<U>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn sample_admissible(
    f: &ExpSumSystem,
    rng: &mut ChaCha8Rng,
    stats: &mut SolveStats,
    counter: &mut usize,
) -> Result<ExpSumSystem> {
    loop {
        let g = sample_gaussian(&f.supports, rng);
        let flags = exclusion_check(&g, f)?;
        if !flags.in_lambda_eps && !flags.in_y_k {
            return Ok(g);
        }
        stats.resamples += 1;
        *counter += 1;
    }
}

/// Track each start root along `q_t = from + t·to` on `[0, ∞)`.
fn track_leg(
    from: &ExpSumSystem,
    to: &ExpSumSystem,
    starts: &[Vec<C64>],
    cfg: &TrackerConfig,
    threads: usize,
) -> Vec<PathTrace> {
    let path = LinearSegment::to_infinity(from.clone(), to.clone());
    par_map(starts, threads, |x| track(&path, x, cfg))
}

fn distinct(f: &ExpSumSystem, pts: &[Vec<C64>]) -> bool {
    let lat = f.supports.lattice();
    for i in 0..pts.len() {
        for j in 0..i {
            if lat.torus_distance(&pts[i], &pts[j]) <= 1e-6 {
                return false;
            }
        }
    }
    true
}

fn finalize(f: &ExpSumSystem, ends: Vec<Vec<C64>>, bkk: i64, alpha: f64) -> Option<CertifiedSolutionSet> {
    let mut roots = Vec::with_capacity(ends.len());
    for x in ends {
        let y = refine(f, &x, 1e-15).ok()?;
        let c = certify(f, &y, alpha);
        if !c.passed {
            return None;
        }
        roots.push(CertifiedRoot { residual: relative_residual(f, &y), point: y, certificate: c });
    }
    let pts: Vec<Vec<C64>> = roots.iter().map(|r| r.point.clone()).collect();
    if !distinct(f, &pts) || roots.len() as i64 != bkk {
        return None;
    }
    roots.sort_by(|a, b| canonical_order(&a.point, &b.point));
    Some(CertifiedSolutionSet { roots, expected_count: bkk })
}

fn canonical_order(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn leg_config(ctx: &SolverContext, alpha: f64, remaining: usize) -> TrackerConfig {
    TrackerConfig {
        alpha_star: alpha,
        h_infinity: ctx.h_infinity,
        max_steps: remaining.max(1),
        ..TrackerConfig::default()
    }
}

/// Run one leg; `None` when a path fails or the budget runs out.
fn run_leg(
    from: &ExpSumSystem,
    to: &ExpSumSystem,
    starts: &[Vec<C64>],
    ctx: &SolverContext,
    config: &SolveConfig,
    budget: f64,
    counter: &mut usize,
    stats: &mut SolveStats,
) -> Option<Vec<Vec<C64>>> {
    let remaining = (budget as usize).saturating_sub(*counter);
    if remaining == 0 {
        return None;
    }
    let cfg = leg_config(ctx, config.alpha_star, remaining);
    let traces = track_leg(from, to, starts, &cfg, config.threads);
    let mut ends = Vec::with_capacity(traces.len());
    let mut ok = true;
    for t in &traces {
        *counter += t.steps + 1;
        stats.paths.push(PathSummary::from(t));
        match (&t.end_point, t.succeeded()) {
            (Some(p), true) => ends.push(p.clone()),
            _ => ok = false,
        }
    }
    (ok && (*counter as f64) <= budget).then_some(ends)
}

/// `h → g → f` through a fresh Gaussian `g` per attempt.
pub fn cheater_solve(f: &ExpSumSystem, h: &ExpSumSystem, xh: &[Vec<C64>], config: &SolveConfig) -> Result<SolveOutcome> {
    let f = f.normalized()?;
    let h = h.normalized()?;
    let ctx = SolverContext::new(&f, config.h_override)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = SolveStats::default();
    let mut budget = config.n0.unwrap_or(1000.0 * ctx.bkk.max(1) as f64);
    for attempt in 1..=config.max_attempts {
        stats.attempts = attempt;
        let mut counter = 0usize;
        let g = sample_admissible(&f, &mut rng, &mut stats, &mut counter)?;
        let result = run_leg(&h, &g, xh, &ctx, config, budget, &mut counter, &mut stats)
            .and_then(|mid| distinct(&g, &mid).then_some(mid))
            .and_then(|mid| run_leg(&g, &f, &mid, &ctx, config, budget, &mut counter, &mut stats))
            .and_then(|ends| finalize(&f, ends, ctx.bkk, config.alpha_star));
        stats.newton_steps += counter;
        stats.final_budget = budget;
        if let Some(solution) = result {
            return Ok(SolveOutcome { solution, stats });
        }
        budget *= config.growth;
    }
    Err(Error::BudgetExceeded)
}

/// Roots of `g` found by damped Newton from random points, stopping at `count`.
pub fn multistart_roots(g: &ExpSumSystem, count: usize, rng: &mut ChaCha8Rng, tries: usize, alpha: f64) -> Vec<Vec<C64>> {
    let st = &g.supports;
    let n = st.n;
    let lat = st.lattice();
    let nd = Normal::new(0.0, 1.5).unwrap();
    let mut found: Vec<Vec<C64>> = Vec::new();
    for _ in 0..tries {
        if found.len() >= count {
            break;
        }
        let mut y: Vec<C64> = (0..n).map(|_| C64::new(nd.sample(rng), rng.gen_range(0.0..2.0 * PI))).collect();
        let mut converged = false;
        for _ in 0..80 {
            let Ok(d) = newton_displacement(g, &y) else { break };
            let s = st.norm0(d.as_slice());
            let damp = if s > 0.5 { 0.5 / s } else { 1.0 };
            y = y.iter().zip(d.iter()).map(|(a, b)| a + b * damp).collect();
            if y.iter().any(|c| c.re.abs() > 50.0) {
                break;
            }
            if s < 1e-13 {
                converged = true;
                break;
            }
        }
        if !converged {
            continue;
        }
        let y = lat.canonicalize(&y);
        if !certify(g, &y, alpha).passed {
            continue;
        }
        if found.iter().all(|w| lat.torus_distance(w, &y) > 1e-6) {
            found.push(y);
        }
    }
    found
}

/// Roots of a random system and the system itself, as a start for `cheater_solve`.
pub fn random_start(
    supports: &Arc<SupportTuple>,
    rng: &mut ChaCha8Rng,
    config: &SolveConfig,
) -> Result<(ExpSumSystem, Vec<Vec<C64>>)> {
    let bkk = polytope::bkk_count(supports.points())? as usize;
    let mut found = 0;
    for _ in 0..8 {
        let h = sample_gaussian(supports, rng).normalized()?;
        let roots = if supports.n <= 2 {
            oracle::oracle_roots(&h).map(|r| r.roots).unwrap_or_default()
        } else {
            multistart_roots(&h, bkk, rng, config.multistart_tries, config.alpha_star)
        };
        let roots: Vec<Vec<C64>> = roots.into_iter().filter(|x| certify(&h, x, config.alpha_star).passed).collect();
        found = roots.len();
        if found == bkk {
            return Ok((h, roots));
        }
    }
    Err(Error::StartIncomplete { found, expected: bkk })
}

/// Oracle-started solve for `n ≤ 2`: roots of a Gaussian `g` by the brute-force
/// oracle, then `g → f`.
pub fn solve_small(f: &ExpSumSystem, config: &SolveConfig) -> Result<SolveOutcome> {
    if f.n() > 2 {
        return Err(Error::OracleUnavailable(f.n()));
    }
    let f = f.normalized()?;
    if !f.kappa_f().is_finite() {
        return Err(Error::InfiniteKappa);
    }
    let ctx = SolverContext::new(&f, config.h_override)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = SolveStats::default();
    let mut budget = config.n0.unwrap_or(1000.0 * ctx.bkk.max(1) as f64);
    for attempt in 1..=config.max_attempts {
        stats.attempts = attempt;
        let mut counter = 0usize;
        let g = sample_admissible(&f, &mut rng, &mut stats, &mut counter)?;
        let starts: Vec<Vec<C64>> = match oracle::oracle_roots(&g) {
            Ok(r) => r.roots.into_iter().filter(|x| certify(&g, x, config.alpha_star).passed).collect(),
            Err(_) => vec![],
        };
        let result = (starts.len() as i64 == ctx.bkk)
            .then_some(starts)
            .and_then(|s| run_leg(&g, &f, &s, &ctx, config, budget, &mut counter, &mut stats))
            .and_then(|ends| finalize(&f, ends, ctx.bkk, config.alpha_star));
        stats.newton_steps += counter;
        stats.final_budget = budget;
        if let Some(solution) = result {
            return Ok(SolveOutcome { solution, stats });
        }
        budget *= config.growth;
    }
    Err(Error::BudgetExceeded)
}

/// `solve_small` for `n ≤ 2`; otherwise a multistart-solved random start
/// system followed by `cheater_solve`.
pub fn solve(f: &ExpSumSystem, config: &SolveConfig) -> Result<SolveOutcome> {
    if f.n() <= 2 {
        return solve_small(f, config);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_57a7);
    let (h, xh) = random_start(&f.supports, &mut rng, config)?;
    cheater_solve(f, &h, &xh, config)
}

/// One root of `f` from a certified root `x0` of `g`, with the
/// budget grown by `√2` until the single path completes.
pub fn one_root_solve(
    f: &ExpSumSystem,
    g: &ExpSumSystem,
    x0: &[C64],
    config: &SolveConfig,
) -> Result<(Vec<C64>, Certificate, SolveStats)> {
    let f = f.normalized()?;
    let g = g.normalized()?;
    let ctx = SolverContext::new(&f, config.h_override)?;
    let mut stats = SolveStats::default();
    let mut budget = config.n0.unwrap_or(1000.0);
    for attempt in 1..=config.max_attempts.max(64) {
        stats.attempts = attempt;
        let cfg = leg_config(&ctx, config.alpha_star, budget as usize);
        let path = LinearSegment::to_infinity(g.clone(), f.clone());
        let t = track(&path, x0, &cfg);
        stats.newton_steps += t.steps + 1;
        stats.paths.push(PathSummary::from(&t));
        stats.final_budget = budget;
        match t.outcome {
            tracker::Outcome::Success => {
                let y = t.end_point.expect("success has an end point");
                let y = refine(&f, &y, 1e-15)?;
                let c = certify(&f, &y, config.alpha_star);
                return Ok((y, c, stats));
            }
            tracker::Outcome::BudgetExceeded => budget *= config.growth,
            tracker::Outcome::StepStalled(t) => return Err(Error::StepStalled(t)),
            tracker::Outcome::InfinityDiverged(_) => return Err(Error::InfinityDiverged),
            tracker::Outcome::SingularJacobian => return Err(Error::SingularJacobian),
        }
    }
    Err(Error::BudgetExceeded)
}
