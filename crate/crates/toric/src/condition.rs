//! Condition matrix, condition number, renormalized Newton steps and the
//! certified approximate root test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::{zeros, ExpSumSystem, C64};

/// Constants of the step analysis and of the tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmaleConstants {
    pub alpha0: f64,
    pub alpha_star: f64,
    pub alpha_starstar: f64,
    pub delta_star: f64,
    pub u_star: f64,
    pub u_starstar: f64,
    pub u_starstarstar: f64,
    pub theta0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

pub const ALPHA_STAR: f64 = 0.074609958;
pub const ALPHA_STARSTAR: f64 = 0.096917682;
pub const DELTA_STAR: f64 = 0.085180825;
pub const U_STAR: f64 = 0.129283177;
pub const U_STARSTAR: f64 = 0.007556641;
pub const U_STARSTARSTAR: f64 = 0.059668617;
pub const K3: f64 = 0.903836;

/// `(13 - 3√17)/4`.
pub fn alpha0() -> f64 {
    (13.0 - 3.0 * 17f64.sqrt()) / 4.0
}

/// Largest root of `θ² - (1 + (√2 + 16√10)/4)θ + √2/4`.
pub fn theta0() -> f64 {
    let b = 1.0 + (2f64.sqrt() + 16.0 * 10f64.sqrt()) / 4.0;
    let c = 2f64.sqrt() / 4.0;
    (b + (b * b - 4.0 * c).sqrt()) / 2.0
}

impl SmaleConstants {
    pub fn new() -> Self {
        let t = theta0();
        let den = 2.0 * 2f64.sqrt() - 1.0 / t;
        SmaleConstants {
            alpha0: alpha0(),
            alpha_star: ALPHA_STAR,
            alpha_starstar: ALPHA_STARSTAR,
            delta_star: DELTA_STAR,
            u_star: U_STAR,
            u_starstar: U_STARSTAR,
            u_starstarstar: U_STARSTARSTAR,
            theta0: t,
            k1: 8.0 * 5f64.sqrt() / den + 0.5,
            k2: 8.0 / den,
            k3: K3,
        }
    }
}

impl Default for SmaleConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Radii `(r0, r1)` of the alpha theorem.
pub fn smale_radii(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= alpha0()) {
        return Err(Error::OutOfRange(alpha));
    }
    let s = (1.0 - 6.0 * alpha + alpha * alpha).max(0.0).sqrt();
    Ok(((1.0 + alpha - s) / (4.0 * alpha), (1.0 - 3.0 * alpha - s) / (4.0 * alpha)))
}

/// Bound on the certificate after one Newton step from a certificate `alpha`.
pub fn alpha_after_step(alpha: f64) -> f64 {
    let psi = 1.0 - 4.0 * alpha + 2.0 * alpha * alpha;
    alpha * alpha * (1.0 - alpha) / (psi * (1.0 - 2.0 * 5f64.sqrt() * alpha))
}

/// Record of the test `½βμν ≤ α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "crate::io::finite_or_null")]
    pub beta: f64,
    #[serde(with = "crate::io::finite_or_null")]
    pub mu: f64,
    #[serde(with = "crate::io::finite_or_null")]
    pub nu: f64,
    #[serde(with = "crate::io::finite_or_null")]
    pub alpha_hat: f64,
    pub passed: bool,
    pub target_alpha: f64,
}

impl Certificate {
    pub fn from_parts(beta: f64, mu: f64, nu: f64, target_alpha: f64) -> Self {
        let alpha_hat = beta * mu * nu / 2.0;
        Certificate { beta, mu, nu, alpha_hat, passed: alpha_hat <= target_alpha, target_alpha }
    }

    pub fn failed(target_alpha: f64) -> Self {
        Certificate {
            beta: f64::INFINITY,
            mu: f64::INFINITY,
            nu: f64::NAN,
            alpha_hat: f64::INFINITY,
            passed: false,
            target_alpha,
        }
    }
}

/// Condition matrix `M(f, z)`, row `i` being `f_i·(DV_i − V_i m_iᵀ)/‖V_i‖`.
pub fn jacobian_m(f: &ExpSumSystem, z: &[C64]) -> DMatrix<C64> {
    let n = f.n();
    let st = &f.supports;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let (v, dv, _) = st.veronese(i, z);
        let mom = st.momentum(i, z);
        let vn = v.norm();
        let fv: C64 = f.coeffs[i].iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        for j in 0..n {
            let fdv: C64 = f.coeffs[i].iter().enumerate().map(|(k, a)| a * dv[(k, j)]).sum();
            m[(i, j)] = (fdv - fv * mom[j]) / vn;
        }
    }
    m
}

fn spectral_norm(a: DMatrix<C64>) -> f64 {
    a.svd(false, false).singular_values.max()
}

fn mu_with_factor(f: &ExpSumSystem, m: DMatrix<C64>, lt: &DMatrix<f64>) -> f64 {
    let n = f.n();
    let Some(minv) = m.try_inverse() else {
        return f64::INFINITY;
    };
    let norms = f.norms();
    let mut a = DMatrix::<C64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in r..n {
                s += minv[(k, c)] * lt[(r, k)];
            }
            a[(r, c)] = s * norms[c];
        }
    }
    let v = spectral_norm(a);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// `μ(f, z)`: spectral norm of `G(z)^{1/2} M⁻¹ diag(‖f_i‖)`; `+∞` when `M` is singular.
pub fn mu_raw(f: &ExpSumSystem, z: &[C64]) -> f64 {
    let g = f.supports.gram(z);
    let Some(ch) = nalgebra::Cholesky::new(g) else {
        return f64::INFINITY;
    };
    mu_with_factor(f, jacobian_m(f, z), &ch.l().transpose())
}

/// `μ(f·R(x), 0)`, the convention used by certificates.
pub fn mu(f: &ExpSumSystem, x: &[C64]) -> f64 {
    let g = f.renormalize(x);
    let z = zeros(f.n());
    let lt = g.supports.gram0().l().transpose();
    mu_with_factor(&g, jacobian_m(&g, &z), &lt)
}

/// Classical Newton displacement `−(f·DV(x))⁻¹ f·V(x)`.
pub fn newton_displacement(f: &ExpSumSystem, x: &[C64]) -> Result<DVector<C64>> {
    let (val, jac, _) = f.value_and_jacobian(x);
    let d = jac.lu().solve(&(-val)).ok_or(Error::SingularJacobian)?;
    if d.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(d)
    } else {
        Err(Error::SingularJacobian)
    }
}

/// Newton displacement computed as `N(f·R(x), 0)`.
pub fn renormalized_displacement(f: &ExpSumSystem, x: &[C64]) -> Result<DVector<C64>> {
    newton_displacement(&f.renormalize(x), &zeros(f.n()))
}

/// One renormalized Newton step, canonicalized.
pub fn newton_step(f: &ExpSumSystem, x: &[C64]) -> Result<Vec<C64>> {
    let d = newton_displacement(f, x)?;
    let y: Vec<C64> = x.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
    Ok(f.supports.lattice().canonicalize(&y))
}

/// `β(f·R(x), 0) = ‖N(f·R(x),0)‖_0`.
pub fn beta(f: &ExpSumSystem, x: &[C64]) -> Result<f64> {
    let d = newton_displacement(f, x)?;
    Ok(f.supports.norm0(d.as_slice()))
}

/// `½ μ(f·R(x), 0) ν`, the bound used in place of `γ`.
pub fn gamma_bound(f: &ExpSumSystem, x: &[C64]) -> Result<f64> {
    Ok(0.5 * mu(f, x) * f.supports.nu0()?)
}

pub fn certify(f: &ExpSumSystem, x: &[C64], target_alpha: f64) -> Certificate {
    let Ok(nu) = f.supports.nu0() else {
        return Certificate::failed(target_alpha);
    };
    match beta(f, x) {
        Ok(b) => Certificate::from_parts(b, mu(f, x), nu, target_alpha),
        Err(_) => Certificate::failed(target_alpha),
    }
}

/// Newton iteration until the `‖·‖_0` displacement drops below `tol`.
pub fn refine(f: &ExpSumSystem, x: &[C64], tol: f64) -> Result<Vec<C64>> {
    let mut y = x.to_vec();
    let mut prev = f64::INFINITY;
    for _ in 0..60 {
        let d = newton_displacement(f, &y)?;
        let step = f.supports.norm0(d.as_slice());
        y = y.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
        // tolerance is relative to |y|; a step that stops shrinking below 1e-10
        // has hit rounding noise
        let scale = 1.0 + y.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if step <= tol * scale || (step <= 1e-10 * scale && step >= 0.5 * prev) {
            return Ok(f.supports.lattice().canonicalize(&y));
        }
        prev = step;
    }
    Err(Error::NoConvergence)
}

/// `max_i |f_i·V_i(z)| / (‖f_i‖ ‖V_i(z)‖)`, scale free.
pub fn relative_residual(f: &ExpSumSystem, z: &[C64]) -> f64 {
    let (val, _, vn) = f.value_and_jacobian(z);
    let norms = f.norms();
    (0..f.n()).map(|i| val[i].norm() / (norms[i] * vn[i])).fold(0.0, f64::max)
}
