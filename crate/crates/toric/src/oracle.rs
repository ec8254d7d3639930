//! Brute-force root finders for one and two variables, used as independent
//! references for the homotopy solver.

use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::condition::{mu_raw, newton_displacement, relative_residual};
use crate::error::{Error, Result};
use crate::expsum::{ExpSumSystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Companion,
    Resultant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRootSet {
    pub roots: Vec<Vec<C64>>,
    pub method: OracleMethod,
    pub residuals: Vec<f64>,
    pub multiplicities: Vec<usize>,
}

/// Roots of `Σ c_k w^k` in `C*` by companion-matrix eigenvalues, with a few
/// Newton corrections on the polynomial. Exact zero roots are dropped.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![];
    }
    let tol = 1e-14 * scale;
    let lo = coeffs.iter().position(|c| c.norm() > tol).unwrap();
    let hi = coeffs.iter().rposition(|c| c.norm() > tol).unwrap();
    let c = &coeffs[lo..=hi];
    let d = c.len() - 1;
    if d == 0 {
        return vec![];
    }
    let lead = c[d];
    let mut comp = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        comp[(0, k)] = -c[d - 1 - k] / lead;
        if k + 1 < d {
            comp[(k + 1, k)] = C64::new(1.0, 0.0);
        }
    }
    let eig = companion_eigenvalues(comp);
    eig.into_iter()
        .map(|mut w| {
            for _ in 0..3 {
                let (mut p, mut dp) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for &ck in c.iter().rev() {
                    dp = dp * w + p;
                    p = p * w + ck;
                }
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !(step.norm() < 0.1 * w.norm()) {
                    break;
                }
                w -= step;
            }
            w
        })
        .collect()
}

/// QR iteration can stall on spectra symmetric under `λ ↦ −λ`; a complex
/// diagonal shift breaks the symmetry.
fn companion_eigenvalues(comp: DMatrix<C64>) -> Vec<C64> {
    let d = comp.nrows();
    let norm = comp.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for (k, sigma) in [C64::new(0.0, 0.0), C64::new(0.37, 0.61), C64::new(-0.53, 0.29)].into_iter().enumerate() {
        let shift = sigma * norm * k.min(1) as f64;
        let m = &comp + DMatrix::<C64>::identity(d, d) * shift;
        if let Some(s) = Schur::try_new(m, 1e-15, 200 * d.max(10)) {
            return s.eigenvalues().map(|v| v.iter().map(|l| l - shift).collect()).unwrap_or_default();
        }
    }
    vec![]
}

/// Newton-polish a candidate and accept it when it converges to a root.
fn polish(f: &ExpSumSystem, z: &[C64]) -> Option<(Vec<C64>, f64)> {
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return None;
    }
    let mut y = z.to_vec();
    for _ in 0..40 {
        let d = newton_displacement(f, &y).ok()?;
        let step = f.supports.norm0(d.as_slice());
        y = y.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
        if !step.is_finite() || step > 1e3 {
            return None;
        }
        if step < 1e-14 * (1.0 + y.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
            break;
        }
    }
    let r = relative_residual(f, &y);
    (r <= 1e-10).then(|| (f.supports.lattice().canonicalize(&y), r))
}

fn merge(f: &ExpSumSystem, cands: Vec<(Vec<C64>, f64)>, method: OracleMethod) -> OracleRootSet {
    let lat = f.supports.lattice();
    let mut out = OracleRootSet { roots: vec![], method, residuals: vec![], multiplicities: vec![] };
    for (z, r) in cands {
        if let Some(k) = out.roots.iter().position(|w| lat.torus_distance(w, &z) < 1e-9) {
            out.multiplicities[k] += 1;
        } else {
            out.roots.push(z);
            out.residuals.push(r);
            out.multiplicities.push(1);
        }
    }
    // A well-conditioned root is simple however many candidates reached it.
    for (z, m) in out.roots.iter().zip(out.multiplicities.iter_mut()) {
        if mu_raw(f, z) < 1e8 {
            *m = 1;
        }
    }
    out
}

/// All roots in `M` of a one-variable exponential sum.
///
/// With `d = det Λ` and `w = e^{dx}` the sum is a polynomial in `w` of degree
/// `(max A − min A)/d`.
pub fn univariate_roots(f: &ExpSumSystem) -> Result<OracleRootSet> {
    if f.n() != 1 {
        return Err(Error::OracleUnavailable(f.n()));
    }
    let st = &f.supports;
    let d = st.lattice().det();
    let pts = &st.points()[0];
    let amin = pts.iter().map(|p| p[0]).min().unwrap();
    let amax = pts.iter().map(|p| p[0]).max().unwrap();
    let deg = ((amax - amin) / d) as usize;
    let mut c = vec![C64::new(0.0, 0.0); deg + 1];
    for ((p, coef), r) in pts.iter().zip(&f.coeffs[0]).zip(&st.weights()[0]) {
        c[((p[0] - amin) / d) as usize] += coef * r;
    }
    if c.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::LeadingZero);
    }
    let cands = poly_roots(&c)
        .into_iter()
        .filter_map(|w| polish(f, &[w.ln() / d as f64]))
        .collect();
    Ok(merge(f, cands, OracleMethod::Companion))
}

/// Sparse bivariate polynomial with nonnegative exponents.
struct Bipoly {
    terms: BTreeMap<(usize, usize), C64>,
    dx: usize,
    dy: usize,
}

impl Bipoly {
    fn from_equation(f: &ExpSumSystem, i: usize, swap: bool) -> Self {
        let st = &f.supports;
        let pts = &st.points()[i];
        let (ix, iy) = if swap { (1, 0) } else { (0, 1) };
        let mx = pts.iter().map(|p| p[ix]).min().unwrap();
        let my = pts.iter().map(|p| p[iy]).min().unwrap();
        let mut terms = BTreeMap::new();
        for ((p, c), r) in pts.iter().zip(&f.coeffs[i]).zip(&st.weights()[i]) {
            *terms
                .entry(((p[ix] - mx) as usize, (p[iy] - my) as usize))
                .or_insert(C64::new(0.0, 0.0)) += c * r;
        }
        let dx = terms.keys().map(|k| k.0).max().unwrap();
        let dy = terms.keys().map(|k| k.1).max().unwrap();
        Bipoly { terms, dx, dy }
    }

    /// Coefficients in `Y` at a fixed `X`.
    fn in_y(&self, x: C64) -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); self.dy + 1];
        for (&(i, j), &v) in &self.terms {
            c[j] += v * x.powu(i as u32);
        }
        c
    }

    /// Coefficients in `X` (requires `dy == 0`).
    fn in_x(&self) -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); self.dx + 1];
        for (&(i, _), &v) in &self.terms {
            c[i] += v;
        }
        c
    }

    fn eval(&self, x: C64, y: C64) -> (C64, f64) {
        let mut s = C64::new(0.0, 0.0);
        let mut a = 0.0;
        for (&(i, j), &v) in &self.terms {
            let t = v * x.powu(i as u32) * y.powu(j as u32);
            s += t;
            a += t.norm();
        }
        (s, a)
    }
}

fn sylvester_det(p: &[C64], q: &[C64]) -> C64 {
    let (m, n) = (p.len() - 1, q.len() - 1);
    let s = m + n;
    if s == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut a = DMatrix::<C64>::zeros(s, s);
    for r in 0..n {
        for (k, &c) in p.iter().rev().enumerate() {
            a[(r, r + k)] = c;
        }
    }
    for r in 0..m {
        for (k, &c) in q.iter().rev().enumerate() {
            a[(n + r, r + k)] = c;
        }
    }
    a.determinant()
}

/// Candidate `X` values: roots of `Res_Y(P1, P2)(X)`, obtained by evaluating the
/// Sylvester determinant at roots of unity and interpolating.
fn x_candidates(p1: &Bipoly, p2: &Bipoly) -> Result<Vec<C64>> {
    if p1.dy == 0 {
        return Ok(poly_roots(&p1.in_x()));
    }
    if p2.dy == 0 {
        return Ok(poly_roots(&p2.in_x()));
    }
    let deg = p1.dx * p2.dy + p2.dx * p1.dy;
    let npts = deg + 1;
    let vals: Vec<C64> = (0..npts)
        .map(|k| {
            let x = C64::from_polar(1.0, 2.0 * PI * k as f64 / npts as f64);
            sylvester_det(&p1.in_y(x), &p2.in_y(x))
        })
        .collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ResultantDegenerate);
    }
    let coeffs: Vec<C64> = (0..npts)
        .map(|j| {
            vals.iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / npts as f64))
                .sum::<C64>()
                / npts as f64
        })
        .collect();
    let cleaned: Vec<C64> = coeffs
        .into_iter()
        .map(|c| if c.norm() < 1e-12 * scale { C64::new(0.0, 0.0) } else { c })
        .collect();
    Ok(poly_roots(&cleaned))
}

fn bivariate_pass(f: &ExpSumSystem, swap: bool) -> Result<Vec<(Vec<C64>, f64)>> {
    let p1 = Bipoly::from_equation(f, 0, swap);
    let p2 = Bipoly::from_equation(f, 1, swap);
    let mut out = Vec::new();
    for x in x_candidates(&p1, &p2)? {
        if !(x.norm() > 0.0) || !x.norm().is_finite() {
            continue;
        }
        let mut ys = poly_roots(&p1.in_y(x));
        ys.extend(poly_roots(&p2.in_y(x)));
        let mut scored: Vec<(f64, C64)> = ys
            .into_iter()
            .map(|y| {
                let (a, an) = p1.eval(x, y);
                let (b, bn) = p2.eval(x, y);
                (a.norm() / an.max(1e-300) + b.norm() / bn.max(1e-300), y)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = scored.first().map_or(f64::INFINITY, |s| s.0);
        for (r, y) in scored {
            if r > 1e-4 && r > 1e3 * best {
                continue;
            }
            let (lx, ly) = (x.ln(), y.ln());
            let z = if swap { vec![ly, lx] } else { vec![lx, ly] };
            if let Some(p) = polish(f, &z) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// All roots in `M` of a two-variable exponential sum, by elimination of each
/// variable in turn.
pub fn bivariate_roots(f: &ExpSumSystem) -> Result<OracleRootSet> {
    if f.n() != 2 {
        return Err(Error::OracleUnavailable(f.n()));
    }
    let mut cands = bivariate_pass(f, false)?;
    if let Ok(more) = bivariate_pass(f, true) {
        cands.extend(more);
    }
    Ok(merge(f, cands, OracleMethod::Resultant))
}

/// Dispatch on the dimension.
pub fn oracle_roots(f: &ExpSumSystem) -> Result<OracleRootSet> {
    match f.n() {
        1 => univariate_roots(f),
        2 => bivariate_roots(f),
        n => Err(Error::OracleUnavailable(n)),
    }
}

/// Hausdorff distance between two root sets in `M`.
pub fn hausdorff(lat: &crate::lattice::LatticeBasis, a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let one_side = |p: &[Vec<C64>], q: &[Vec<C64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| lat.torus_distance(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one_side(a, b).max(one_side(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::SupportTuple;
    use std::sync::Arc;

    fn sys(points: Vec<Vec<Vec<i64>>>, coeffs: Vec<Vec<(f64, f64)>>) -> ExpSumSystem {
        let st = Arc::new(SupportTuple::unweighted(points).unwrap());
        let c = coeffs
            .into_iter()
            .map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
            .collect();
        ExpSumSystem::new(st, c).unwrap()
    }

    #[test]
    fn exp_minus_one_single_root() {
        let f = sys(vec![vec![vec![0], vec![1]]], vec![vec![(-1.0, 0.0), (1.0, 0.0)]]);
        let r = univariate_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!(r.roots[0][0].norm() < 1e-14);
    }

    #[test]
    fn biquadratic_one_root() {
        let f = sys(vec![vec![vec![0], vec![2]]], vec![vec![(1.0, 0.0), (-1.0, 0.0)]]);
        let r = univariate_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!(r.roots[0][0].norm() < 1e-14);
    }

    #[test]
    fn cubic_three_roots() {
        let f = sys(
            vec![vec![vec![0], vec![1], vec![2], vec![3]]],
            vec![vec![(0.3, -1.0), (1.2, 0.4), (-0.7, 0.1), (0.5, 0.9)]],
        );
        let r = univariate_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 3);
        assert!(r.residuals.iter().all(|&x| x <= 1e-10));
    }

    #[test]
    fn separable_pair() {
        // (e^{x} - 2)(…) style: f1 depends on x only, f2 on y only
        let f = sys(
            vec![
                vec![vec![0, 0], vec![1, 0], vec![2, 0]],
                vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![0, 3]],
            ],
            vec![
                vec![(2.0, 0.0), (-3.0, 0.0), (1.0, 0.0)],
                vec![(0.3, 1.0), (1.0, -0.5), (0.2, 0.2), (1.0, 0.0)],
            ],
        );
        let r = bivariate_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 6);
    }

    #[test]
    fn linear_dense_pair() {
        // 1 + 2X + 3Y = 0, 2 - X + Y = 0  →  X = 1, Y = -1
        let f = sys(
            vec![vec![vec![0, 0], vec![1, 0], vec![0, 1]], vec![vec![0, 0], vec![1, 0], vec![0, 1]]],
            vec![vec![(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], vec![(2.0, 0.0), (-1.0, 0.0), (1.0, 0.0)]],
        );
        let r = bivariate_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 1);
        let z = &r.roots[0];
        assert!((z[0].exp() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((z[1].exp() - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }
}
