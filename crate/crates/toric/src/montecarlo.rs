//! Monte Carlo estimators checked against one-sided expectation and
//! probability bounds on oracle-solvable systems.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::condition::{jacobian_m, mu};
use crate::error::{Error, Result};
use crate::expsum::{ExpSumSystem, SupportTuple, C64};
use crate::oracle;
use crate::polytope;
use crate::solver::{default_epsilon, exclusion_check_with, sample_gaussian};
use crate::tracker::k_constant;

/// How the pass flag is derived from the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassRule {
    /// `mean + 3·stderr ≤ bound`.
    UpperConfidence,
    /// `mean ≤ bound + 3·stderr`, for bounds that are nearly attained.
    WithinNoise,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub bound: f64,
    pub rule: PassRule,
    pub pass: bool,
    /// Per-sample values, in sample order.
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl McReport {
    pub fn from_values(name: &str, values: Vec<f64>, bound: f64, rule: PassRule) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let stderr = (var / n.max(1) as f64).sqrt();
        let pass = match rule {
            PassRule::UpperConfidence => mean + 3.0 * stderr <= bound,
            PassRule::WithinNoise => mean <= bound + 3.0 * stderr,
        };
        McReport { name: name.to_string(), mean, stderr, samples: n, bound, rule, pass, values }
    }

    /// One `index,value` line per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sample,value\n");
        for (k, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{k},{v}\n"));
        }
        s
    }
}

/// Sample `k` always uses stream `k` of the seed, whatever the thread count.
fn sample_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k as u64);
    r
}

fn par_samples<F: Fn(usize) -> f64 + Sync>(count: usize, threads: usize, f: F) -> Vec<f64> {
    if threads <= 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(threads).max(1);
    let idx: Vec<usize> = (0..count).collect();
    std::thread::scope(|s| {
        let hs: Vec<_> = idx.chunks(chunk).map(|c| s.spawn(|| c.iter().map(|&k| f(k)).collect::<Vec<f64>>())).collect();
        hs.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub threads: usize,
}

/// `q ~ N(f̄, Σ²)` with `E|q_ia − f̄_ia|² = σ_ia²`.
fn sample_shifted(
    st: &Arc<SupportTuple>,
    sigma: &[Vec<f64>],
    f_bar: Option<&[Vec<C64>]>,
    rng: &mut ChaCha8Rng,
) -> ExpSumSystem {
    let nd = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let coeffs = (0..st.n)
        .map(|i| {
            (0..st.size(i))
                .map(|a| {
                    let c = f_bar.map_or(C64::new(0.0, 0.0), |fb| fb[i][a]);
                    c + C64::new(nd.sample(rng), nd.sample(rng)) * sigma[i][a]
                })
                .collect()
        })
        .collect();
    ExpSumSystem::new(st.clone(), coeffs).expect("shapes match")
}

fn frobenius_sq(m: &DMatrix<C64>) -> Option<f64> {
    m.clone().try_inverse().map(|inv| inv.iter().map(|c| c.norm_sqr()).sum())
}

fn in_strip(z: &[C64], h: f64) -> bool {
    z.iter().all(|c| c.re.abs() <= h)
}

fn check_small(st: &SupportTuple) -> Result<()> {
    if st.n > 2 {
        return Err(Error::OracleUnavailable(st.n));
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `E[Σ_{Z_H} ‖M(q,z)⁻¹‖²_F]` against `(2H√n/det Λ)(1/min σ²) n! V′`.
pub fn mc_moment_frobenius(
    st: &Arc<SupportTuple>,
    sigma: &[Vec<f64>],
    f_bar: Option<&[Vec<C64>]>,
    h: f64,
    cfg: McConfig,
) -> Result<McReport> {
    check_small(st)?;
    let n = st.n;
    let vprime = polytope::mixed_area(st.points())?.to_f64();
    let min_sigma2 = sigma.iter().flatten().fold(f64::INFINITY, |m, s| m.min(s * s));
    let det = st.lattice().det() as f64;
    let bound = 2.0 * h * (n as f64).sqrt() / det / min_sigma2 * factorial(n) * vprime;
    let values = par_samples(cfg.samples, cfg.threads, |k| {
        let mut rng = sample_rng(cfg.seed, k);
        let q = sample_shifted(st, sigma, f_bar, &mut rng);
        let Ok(roots) = oracle::oracle_roots(&q) else { return 0.0 };
        roots
            .roots
            .iter()
            .filter(|z| in_strip(z, h))
            .filter_map(|z| frobenius_sq(&jacobian_m(&q, z)))
            .sum()
    });
    Ok(McReport::from_values("moment_frobenius", values, bound, PassRule::UpperConfidence))
}

/// `E[Σ_{Z_H} μ²(g·R(z))]` for Gaussian `g` against the assembled bound.
pub fn mc_moment_mu(st: &Arc<SupportTuple>, h: f64, cfg: McConfig) -> Result<McReport> {
    check_small(st)?;
    let n = st.n;
    let nf = n as f64;
    let vprime = polytope::mixed_area(st.points())?.to_f64();
    let det = st.lattice().det() as f64;
    let sizes: Vec<usize> = (0..n).map(|i| st.size(i)).collect();
    let min_s = *sizes.iter().min().unwrap() as f64;
    let max_s = *sizes.iter().max().unwrap() as f64;
    let sum_delta2: f64 = (0..n).map(|i| st.radius_delta0(i).powi(2)).sum();
    let inner = 4.0 + (nf.ln() / min_s + 2.0 * 1.5f64.ln()).sqrt();
    let bound = 2.5 * std::f64::consts::E * h * nf.sqrt() / det
        * inner.powi(2)
        * max_s.powi(2)
        * sum_delta2
        * factorial(n)
        * vprime;
    let values = par_samples(cfg.samples, cfg.threads, |k| {
        let mut rng = sample_rng(cfg.seed, k);
        let g = sample_gaussian(st, &mut rng);
        let Ok(roots) = oracle::oracle_roots(&g) else { return 0.0 };
        roots.roots.iter().filter(|z| in_strip(z, h)).map(|z| mu(&g, z).powi(2)).filter(|v| v.is_finite()).sum()
    });
    Ok(McReport::from_values("moment_mu", values, bound, PassRule::UpperConfidence))
}

/// Frequencies of `g ∈ Λ_ε` and `g ∈ Y_K` for Gaussian `g`, against `Sε/π`
/// and `1/10`. `eps` defaults to `π/(72S)`.
pub fn mc_exclusion(f: &ExpSumSystem, eps: Option<f64>, cfg: McConfig) -> Result<(McReport, McReport)> {
    let st = &f.supports;
    let s = st.total_size();
    let eps = eps.unwrap_or_else(|| default_epsilon(s));
    let min_si = (0..st.n).map(|i| st.size(i)).min().unwrap();
    let k = k_constant(st.n, min_si);
    exclusion_check_with(f, f, eps, k)?;
    let flags: Vec<(f64, f64)> = par_samples(cfg.samples, cfg.threads, |j| {
        let mut rng = sample_rng(cfg.seed, j);
        let g = sample_gaussian(st, &mut rng);
        let fl = exclusion_check_with(&g, f, eps, k).expect("coefficients checked");
        (fl.in_lambda_eps as u8 as f64) + 2.0 * (fl.in_y_k as u8 as f64)
    })
    .into_iter()
    .map(|v| (v % 2.0, (v / 2.0).floor()))
    .collect();
    let lam = McReport::from_values(
        "exclusion_lambda_eps",
        flags.iter().map(|p| p.0).collect(),
        s as f64 * eps / std::f64::consts::PI,
        PassRule::WithinNoise,
    );
    let yk = McReport::from_values("exclusion_y_k", flags.iter().map(|p| p.1).collect(), 0.1, PassRule::WithinNoise);
    Ok((lam, yk))
}

/// The desk-scale configuration `n = 1, A = {0,1,2,3}, Σ = I, f̄ = 0, H = 2`.
pub fn preset_em2_n1(cfg: McConfig) -> Result<McReport> {
    let st = Arc::new(SupportTuple::unweighted(vec![vec![vec![0], vec![1], vec![2], vec![3]]])?);
    let sigma = vec![vec![1.0; 4]];
    mc_moment_frobenius(&st, &sigma, None, 2.0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(samples: usize) -> McConfig {
        McConfig { samples, seed: 17, threads: 1 }
    }

    #[test]
    fn n1_frobenius_moment_matches_kac_rice() {
        // For n = 1 the Kac-Rice formula gives the mean exactly: the strip
        // area 2H·2π/det Λ divided by πσ², which is 4H here.
        let r = preset_em2_n1(cfg(10_000)).unwrap();
        assert!((r.bound - 8.0).abs() < 1e-12);
        assert!((r.mean - 8.0).abs() < 0.8, "{} ± {}", r.mean, r.stderr);
        assert_eq!(r.pass, r.mean + 3.0 * r.stderr <= r.bound);
    }

    #[test]
    fn smaller_strip_smaller_mean() {
        let st = Arc::new(SupportTuple::unweighted(vec![vec![vec![0], vec![1], vec![2], vec![3]]]).unwrap());
        let sigma = vec![vec![1.0; 4]];
        let a = mc_moment_frobenius(&st, &sigma, None, 2.0, cfg(1000)).unwrap();
        let b = mc_moment_frobenius(&st, &sigma, None, 0.5, cfg(1000)).unwrap();
        assert!(b.mean <= a.mean);
    }

    #[test]
    fn sigma_scaling() {
        let st = Arc::new(SupportTuple::unweighted(vec![vec![vec![0], vec![1], vec![2]]]).unwrap());
        let a = mc_moment_frobenius(&st, &[vec![1.0; 3]], None, 1.0, cfg(1000)).unwrap();
        let b = mc_moment_frobenius(&st, &[vec![2.0; 3]], None, 1.0, cfg(1000)).unwrap();
        // Same streams: each sample is scaled exactly.
        assert!((b.mean * 4.0 - a.mean).abs() <= 1e-9 * a.mean);
    }

    #[test]
    fn thread_count_does_not_change_values() {
        let a = preset_em2_n1(cfg(300)).unwrap();
        let b = preset_em2_n1(McConfig { threads: 4, ..cfg(300) }).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn mu_moment_at_least_root_count() {
        let st = Arc::new(SupportTuple::unweighted(vec![vec![vec![0], vec![1], vec![2], vec![3]]]).unwrap());
        let r = mc_moment_mu(&st, 2.0, cfg(1000)).unwrap();
        assert!(r.mean >= 1.0);
        assert!(r.pass);
    }

    #[test]
    fn exclusion_zero_eps() {
        let st = Arc::new(SupportTuple::unweighted(vec![vec![vec![0], vec![1], vec![2]]]).unwrap());
        let f = sample_gaussian(&st, &mut ChaCha8Rng::seed_from_u64(1));
        let (lam, yk) = mc_exclusion(&f, Some(0.0), cfg(1000)).unwrap();
        assert_eq!(lam.mean, 0.0);
        assert!(yk.pass);
        let (lam, _) = mc_exclusion(&f, None, cfg(5000)).unwrap();
        assert!(lam.pass, "{lam:?}");
    }
}
