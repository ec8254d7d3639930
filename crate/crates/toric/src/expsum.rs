//! Weighted supports, the scaled Veronese map, toric metrics and the
//! renormalization action on coefficient systems.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{lattice_from_points, LatticeBasis};
use crate::polytope::{hull_vertices, Point};

pub type C64 = Complex64;

/// Integer supports with positive weights, centred so that `m_i(0) = 0`.
#[derive(Debug, Clone)]
pub struct SupportTuple {
    pub n: usize,
    points: Vec<Vec<Point>>,
    rho: Vec<Vec<f64>>,
    center: Vec<Vec<f64>>,
    shifted: Vec<Vec<Vec<f64>>>,
    lattice: LatticeBasis,
    gram0: Cholesky<f64, Dyn>,
    nu0: Vec<Option<f64>>,
}

impl SupportTuple {
    pub fn new(points: Vec<Vec<Point>>, rho: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let n = points.len();
        for (i, a) in points.iter().enumerate() {
            if a.len() < 2 {
                return Err(Error::TooFewPoints(i));
            }
            if a.iter().any(|p| p.len() != n) {
                return Err(Error::Dimension(format!("support {i} has points outside Z^{n}")));
            }
        }
        let rho = rho.unwrap_or_else(|| points.iter().map(|a| vec![1.0; a.len()]).collect());
        if rho.len() != n || rho.iter().zip(&points).any(|(r, a)| r.len() != a.len()) {
            return Err(Error::Dimension("weights do not match supports".into()));
        }
        if rho.iter().flatten().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::Dimension("weights must be positive".into()));
        }
        let lattice = lattice_from_points(&points, n)?;
        let mut center = Vec::with_capacity(n);
        let mut shifted = Vec::with_capacity(n);
        for (a, r) in points.iter().zip(&rho) {
            let w: f64 = r.iter().map(|x| x * x).sum();
            let c: Vec<f64> = (0..n)
                .map(|j| a.iter().zip(r).map(|(p, x)| x * x * p[j] as f64).sum::<f64>() / w)
                .collect();
            shifted.push(
                a.iter()
                    .map(|p| p.iter().zip(&c).map(|(&x, y)| x as f64 - y).collect())
                    .collect(),
            );
            center.push(c);
        }
        let mut st = SupportTuple {
            n,
            points,
            rho,
            center,
            shifted,
            lattice,
            gram0: Cholesky::new(DMatrix::identity(n, n)).unwrap(),
            nu0: vec![],
        };
        let zero = vec![C64::new(0.0, 0.0); n];
        st.gram0 = Cholesky::new(st.gram(&zero)).ok_or(Error::DegenerateGram(usize::MAX))?;
        st.nu0 = (0..n).map(|i| st.nu_at(i, &zero).ok()).collect();
        Ok(st)
    }

    pub fn unweighted(points: Vec<Vec<Point>>) -> Result<Self> {
        Self::new(points, None)
    }

    pub fn points(&self) -> &[Vec<Point>] {
        &self.points
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.rho
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.center[i]
    }

    /// Centred points `a - c_i`.
    pub fn shifted(&self, i: usize) -> &[Vec<f64>] {
        &self.shifted[i]
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    pub fn size(&self, i: usize) -> usize {
        self.points[i].len()
    }

    pub fn total_size(&self) -> usize {
        self.points.iter().map(|a| a.len()).sum()
    }

    pub fn unit_weights(&self) -> bool {
        self.rho.iter().flatten().all(|&r| r == 1.0)
    }

    /// `ℓ_i(z) = max_a b·Re z` over the centred points.
    pub fn ell(&self, i: usize, z: &[C64]) -> f64 {
        self.shifted[i]
            .iter()
            .map(|b| dot_re(b, z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Scaled Veronese vector `e^{-ℓ_i(z)} V_{A_i}(z)`, its derivative and `ℓ_i(z)`.
    pub fn veronese(&self, i: usize, z: &[C64]) -> (DVector<C64>, DMatrix<C64>, f64) {
        let ell = self.ell(i, z);
        let s = self.size(i);
        let mut v = DVector::zeros(s);
        let mut dv = DMatrix::zeros(s, self.n);
        for (k, (b, &r)) in self.shifted[i].iter().zip(&self.rho[i]).enumerate() {
            let e = b.iter().zip(z).map(|(&bj, zj)| zj * bj).sum::<C64>() - ell;
            let val = e.exp() * r;
            v[k] = val;
            for j in 0..self.n {
                dv[(k, j)] = val * b[j];
            }
        }
        (v, dv, ell)
    }

    /// Momentum `m_i(z) = Σ|V_a|² b / ‖V‖²`.
    pub fn momentum(&self, i: usize, z: &[C64]) -> Vec<f64> {
        let (v, _, _) = self.veronese(i, z);
        let w: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        (0..self.n)
            .map(|j| {
                self.shifted[i]
                    .iter()
                    .zip(v.iter())
                    .map(|(b, x)| x.norm_sqr() * b[j])
                    .sum::<f64>()
                    / w
            })
            .collect()
    }

    /// Covariance `C_i(z)`, the matrix of `‖·‖²_{i,z}`.
    pub fn covariance(&self, i: usize, z: &[C64]) -> DMatrix<f64> {
        let (v, _, _) = self.veronese(i, z);
        let w: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let m = self.momentum(i, z);
        let mut c = DMatrix::zeros(self.n, self.n);
        for (b, x) in self.shifted[i].iter().zip(v.iter()) {
            let d: Vec<f64> = b.iter().zip(&m).map(|(p, q)| p - q).collect();
            let wa = x.norm_sqr() / w;
            for r in 0..self.n {
                for s in 0..self.n {
                    c[(r, s)] += wa * d[r] * d[s];
                }
            }
        }
        c
    }

    /// Toric Gram matrix `G(z) = Σ_i C_i(z)`.
    pub fn gram(&self, z: &[C64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            g += self.covariance(i, z);
        }
        g
    }

    /// Cholesky factor of `G(0)`, cached.
    pub fn gram0(&self) -> &Cholesky<f64, Dyn> {
        &self.gram0
    }

    /// `‖u‖_{i,z}` for each `i` and `‖u‖_z`.
    pub fn toric_norm(&self, z: &[C64], u: &[C64]) -> (Vec<f64>, f64) {
        let per: Vec<f64> = (0..self.n).map(|i| quad_form(&self.covariance(i, z), u).sqrt()).collect();
        let total = per.iter().map(|x| x * x).sum::<f64>().sqrt();
        (per, total)
    }

    /// `‖u‖_0` through the cached Cholesky factor.
    pub fn norm0(&self, u: &[C64]) -> f64 {
        let l = self.gram0.l();
        let mut s = 0.0;
        for j in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for i in j..self.n {
                acc += u[i] * l[(i, j)];
            }
            s += acc.norm_sqr();
        }
        s.sqrt()
    }

    /// `δ_i(z) = max_a ‖a - m_i(z)‖`.
    pub fn radius_delta(&self, i: usize, z: &[C64]) -> f64 {
        let m = self.momentum(i, z);
        self.shifted[i]
            .iter()
            .map(|b| b.iter().zip(&m).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn radius_delta0(&self, i: usize) -> f64 {
        self.radius_delta(i, &vec![C64::new(0.0, 0.0); self.n])
    }

    /// `ν_i(z) = max_a ‖a - m_i(z)‖*_{i,z}`.
    pub fn nu_at(&self, i: usize, z: &[C64]) -> Result<f64> {
        // C_i may be singular when A_i is not full-dimensional; a − m_i lies in
        // its range, so the dual seminorm is the pseudo-inverse quadratic form.
        let eig = SymmetricEigen::new(self.covariance(i, z));
        let top = eig.eigenvalues.max();
        if top <= 0.0 {
            return Err(Error::DegenerateGram(i));
        }
        let m = self.momentum(i, z);
        let mut best: f64 = 0.0;
        for b in &self.shifted[i] {
            let d = DVector::from_iterator(self.n, b.iter().zip(&m).map(|(p, q)| p - q));
            let mut q = 0.0;
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam > 1e-12 * top {
                    q += eig.eigenvectors.column(k).dot(&d).powi(2) / lam;
                }
            }
            best = best.max(q.sqrt());
        }
        Ok(best)
    }

    /// `ν_i(0)` per support.
    pub fn nu0_per(&self) -> Result<Vec<f64>> {
        self.nu0
            .iter()
            .enumerate()
            .map(|(i, v)| v.ok_or(Error::DegenerateGram(i)))
            .collect()
    }

    /// `ν = max_i ν_i(0)`.
    pub fn nu0(&self) -> Result<f64> {
        Ok(self.nu0_per()?.into_iter().fold(0.0, f64::max))
    }

    /// `κ_{ρ_i} = √Σρ² / min over vertices ρ`.
    pub fn kappa_rho(&self, i: usize) -> f64 {
        let verts = hull_vertices(&self.points[i]);
        let num: f64 = self.rho[i].iter().map(|r| r * r).sum::<f64>().sqrt();
        let den = self.points[i]
            .iter()
            .zip(&self.rho[i])
            .filter(|(p, _)| verts.contains(p))
            .map(|(_, &r)| r)
            .fold(f64::INFINITY, f64::min);
        num / den
    }
}

fn dot_re(b: &[f64], z: &[C64]) -> f64 {
    b.iter().zip(z).map(|(x, w)| x * w.re).sum()
}

fn quad_form(c: &DMatrix<f64>, u: &[C64]) -> f64 {
    let n = u.len();
    let mut s = C64::new(0.0, 0.0);
    for r in 0..n {
        for q in 0..n {
            s += u[r].conj() * c[(r, q)] * u[q];
        }
    }
    s.re.max(0.0)
}

/// Complex coefficient covectors over a support tuple.
///
/// `log_scale[i]` records a factor `e^{log_scale[i]}` divided out of equation
/// `i`; it never affects roots or projective quantities.
#[derive(Debug, Clone)]
pub struct ExpSumSystem {
    pub supports: Arc<SupportTuple>,
    pub coeffs: Vec<Vec<C64>>,
    pub log_scale: Vec<f64>,
}

impl ExpSumSystem {
    pub fn new(supports: Arc<SupportTuple>, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if coeffs.len() != supports.n
            || coeffs.iter().enumerate().any(|(i, c)| c.len() != supports.size(i))
        {
            return Err(Error::Dimension("coefficients do not match supports".into()));
        }
        let n = supports.n;
        Ok(ExpSumSystem { supports, coeffs, log_scale: vec![0.0; n] })
    }

    pub fn n(&self) -> usize {
        self.supports.n
    }

    pub fn norms(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// Rescale each equation to `‖f_i‖ = √S_i`.
    pub fn normalized(&self) -> Result<Self> {
        let norms = self.norms();
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if norms[i] == 0.0 {
                return Err(Error::ZeroEquation(i));
            }
            let s = (c.len() as f64).sqrt() / norms[i];
            c.iter_mut().for_each(|x| *x *= s);
            out.log_scale[i] -= s.ln();
        }
        Ok(out)
    }

    /// `e^{-ℓ_i(z)} f_i·V_{A_i}(z)` for each equation.
    pub fn evaluate(&self, z: &[C64]) -> Vec<C64> {
        (0..self.n())
            .map(|i| {
                let (v, _, _) = self.supports.veronese(i, z);
                self.coeffs[i].iter().zip(v.iter()).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Scaled values and Jacobian of `F(y) = f·V(y)` at `z`, with the row norms `‖V_i(z)‖`.
    pub fn value_and_jacobian(&self, z: &[C64]) -> (DVector<C64>, DMatrix<C64>, Vec<f64>) {
        let n = self.n();
        let mut f = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, n);
        let mut vn = vec![0.0; n];
        for i in 0..n {
            let (v, dv, _) = self.supports.veronese(i, z);
            vn[i] = v.norm();
            for (k, c) in self.coeffs[i].iter().enumerate() {
                f[i] += c * v[k];
                for col in 0..n {
                    j[(i, col)] += c * dv[(k, col)];
                }
            }
        }
        (f, j, vn)
    }

    /// `max_{i,a} ‖f_i‖/|f_{ia}|`; infinite when a coefficient vanishes.
    pub fn kappa_f(&self) -> f64 {
        let norms = self.norms();
        let mut k: f64 = 0.0;
        for (c, nrm) in self.coeffs.iter().zip(norms) {
            for x in c {
                let a = x.norm();
                if a == 0.0 {
                    return f64::INFINITY;
                }
                k = k.max(nrm / a);
            }
        }
        k
    }

    /// `f·R(u)`: coefficients `f_{ia} e^{b·u - ℓ_i(u)}`, with `ℓ_i(u)` folded into `log_scale`.
    pub fn renormalize(&self, u: &[C64]) -> Self {
        let st = &self.supports;
        let mut out = self.clone();
        for i in 0..self.n() {
            let ell = st.ell(i, u);
            for (c, b) in out.coeffs[i].iter_mut().zip(st.shifted(i)) {
                let e = b.iter().zip(u).map(|(&bj, uj)| uj * bj).sum::<C64>() - ell;
                *c *= e.exp();
            }
            out.log_scale[i] += ell;
        }
        out
    }

    /// Coefficientwise affine combination `self + t·other` (log scales ignored).
    pub fn axpy(&self, t: f64, other: &ExpSumSystem) -> Self {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * t;
            }
        }
        out.log_scale = vec![0.0; self.n()];
        out
    }

    pub fn scaled(&self, lambda: &[C64]) -> Self {
        let mut out = self.clone();
        for (c, l) in out.coeffs.iter_mut().zip(lambda) {
            c.iter_mut().for_each(|x| *x *= l);
        }
        out
    }
}

/// Sine of the angle between two nonzero complex vectors.
pub fn projective_sine(f: &[C64], g: &[C64]) -> f64 {
    let nf: f64 = f.iter().map(|x| x.norm_sqr()).sum();
    let ng: f64 = g.iter().map(|x| x.norm_sqr()).sum();
    let ip: C64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
    let cos2 = (ip.norm_sqr() / (nf * ng)).min(1.0);
    if cos2 < 0.5 {
        return (1.0 - cos2).sqrt();
    }
    // residual of the best fit λg is accurate for nearly parallel vectors
    let lambda = ip.conj() / ng;
    let r: f64 = f.iter().zip(g).map(|(a, b)| (a - b * lambda).norm_sqr()).sum();
    (r / nf).sqrt().min(1.0)
}

/// Multiprojective distance `√Σ_i sin²∠(f_i, g_i)`.
pub fn multiproj_distance(f: &ExpSumSystem, g: &ExpSumSystem) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..f.n() {
        if f.coeffs[i].iter().all(|x| x.norm() == 0.0) || g.coeffs[i].iter().all(|x| x.norm() == 0.0) {
            return Err(Error::ZeroEquation(i));
        }
        s += projective_sine(&f.coeffs[i], &g.coeffs[i]).powi(2);
    }
    Ok(s.sqrt())
}

pub fn zeros(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}
