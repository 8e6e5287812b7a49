//! Closed-form rounding-error quantities for single-vector PINVIT and the
//! measurements that feed them.

use serde::{Deserialize, Serialize};

use crate::dense::{small_herm_eig, DenseMatrix};
use crate::error::{Error, Result};
use crate::precision::PrecisionTag;
use crate::precond::Preconditioner;
use crate::scalar::{RealScalar, WorkingScalar};

/// `γ_n = n u / (1 − n u)`.
pub fn gamma_n(n: usize, u: f64) -> Result<f64> {
    let nu = n as f64 * u;
    if nu >= 1.0 {
        return Err(Error::AssumptionViolated(format!("n·u = {nu} >= 1")));
    }
    Ok(nu / (1.0 - nu))
}

/// Relative error of a matrix-vector product, `√n γ_n`.
pub fn epsilon_a(n: usize, u_h: f64) -> Result<f64> {
    Ok((n as f64).sqrt() * gamma_n(n, u_h)?)
}

/// Relative error of a computed residual `Ax − ρx`.
pub fn epsilon_r(n: usize, u_h: f64, eps_a: f64) -> Result<f64> {
    let two_nu = 2.0 * n as f64 * u_h;
    if two_nu >= 1.0 {
        return Err(Error::AssumptionViolated(format!("2n·u = {two_nu} >= 1")));
    }
    let g = gamma_n(n, u_h)?;
    let head = g + eps_a + g * eps_a + (n as f64 + 1.0) * u_h;
    Ok(head * (1.0 + u_h) / (1.0 - two_nu) + eps_a + u_h)
}

/// `ε_T = 4n(3n+1) κ u_l`, the lower-precision Cholesky perturbation level.
pub fn epsilon_t(n: usize, kappa: f64, u_l: f64) -> Result<f64> {
    let n = n as f64;
    let eps = 4.0 * n * (3.0 * n + 1.0) * kappa * u_l;
    if eps >= 1.0 {
        return Err(Error::BoundVacuous(eps));
    }
    Ok(eps)
}

/// Bound `ε_T / (1 − ε_T)` on `‖I − A^{1/2} T A^{1/2}‖₂`.
pub fn precond_gamma_bound(eps_t: f64) -> f64 {
    eps_t / (1.0 - eps_t)
}

/// `β = max{√(λ₁λ_n)/(ρ − λ₁), √(λ₂λ_n)/(λ₂ − ρ)}` for `λ₁ < ρ < λ₂`.
pub fn beta(rho: f64, lambda1: f64, lambda2: f64, lambdan: f64) -> Result<f64> {
    if !(lambda1 < rho && rho < lambda2) {
        return Err(Error::OutOfInterval { rho, lambda1, lambda2 });
    }
    let lower = (lambda1 * lambdan).sqrt() / (rho - lambda1);
    let upper = (lambda2 * lambdan).sqrt() / (lambda2 - rho);
    Ok(lower.max(upper))
}

/// Effective preconditioner quality including working-precision rounding:
/// `γ_T + γ₂‖T‖‖A‖ + β(u_h + (1 + γ₂) ε_r ‖T‖‖A‖)`.
pub fn gamma_total(gamma_precond: f64, norm_t_norm_a: f64, beta_val: f64, u_h: f64, eps_r: f64) -> Result<f64> {
    let g2 = gamma_n(2, u_h)?;
    Ok(gamma_precond + g2 * norm_t_norm_a + beta_val * (u_h + (1.0 + g2) * eps_r * norm_t_norm_a))
}

/// Squared contraction factor `(γ + (1 − γ)λ₁/λ₂)²` of `(ρ − λ₁)/(λ₂ − ρ)`.
pub fn rate_bound(gamma: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::GammaTooLarge(gamma));
    }
    let f = gamma + (1.0 - gamma) * lambda1 / lambda2;
    Ok(f * f)
}

/// Absolute eigenvalue error `ρ − λ₁` below which contraction is no longer
/// guaranteed.
pub fn accuracy_floor(
    gamma_precond: f64,
    norm_t_norm_a: f64,
    u_h: f64,
    eps_r: f64,
    lambda1: f64,
    lambdan: f64,
) -> Result<f64> {
    let g2 = gamma_n(2, u_h)?;
    let denom = 1.0 - gamma_precond - g2 * norm_t_norm_a;
    if denom <= 0.0 {
        return Err(Error::DenominatorNonpositive(denom));
    }
    Ok((u_h + (1.0 + g2) * eps_r * norm_t_norm_a) / denom * (lambda1 * lambdan).sqrt())
}

fn check_square<W: WorkingScalar>(a: &DenseMatrix<W>, p: &Preconditioner<W>) -> Result<()> {
    if !a.is_square() || a.nrows() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}×{} against preconditioner of order {}",
            a.nrows(),
            a.ncols(),
            p.n()
        )));
    }
    Ok(())
}

fn spectral_norm<W: WorkingScalar>(m: &DenseMatrix<W>) -> Result<f64> {
    let gram = m.adjoint_mul(m);
    let top = small_herm_eig(&gram)?.values.last().map_or(0.0, |v| v.to_f64());
    Ok(top.max(0.0).sqrt())
}

/// Measured `‖I − A^{1/2} T A^{1/2}‖₂`, with `T` applied exactly as a solve would.
pub fn measure_gamma_precond<W: WorkingScalar>(a: &DenseMatrix<W>, p: &Preconditioner<W>) -> Result<f64> {
    check_square(a, p)?;
    let eig = small_herm_eig(a)?;
    let roots: Vec<f64> = eig.values.iter().map(|v| v.to_f64().max(0.0).sqrt()).collect();
    let root = eig.vectors.scale_columns(&roots).mul(&eig.vectors.adjoint());
    let mut m = root.mul(&p.apply(&root)?);
    for v in m.as_mut_slice() {
        *v = -*v;
    }
    for i in 0..m.nrows() {
        m[(i, i)] += W::one();
    }
    spectral_norm(&m)
}

/// Measured `‖T‖₂ ‖A‖₂`.
pub fn measure_norm_product<W: WorkingScalar>(a: &DenseMatrix<W>, p: &Preconditioner<W>) -> Result<f64> {
    check_square(a, p)?;
    let t = p.apply(&DenseMatrix::identity(a.nrows()))?;
    Ok(spectral_norm(&t)? * spectral_norm(a)?)
}

/// Every bound quantity for one matrix, preconditioner and Rayleigh quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub eps_a: f64,
    pub eps_r: f64,
    /// `None` when `ε_T ≥ 1`.
    pub eps_t: Option<f64>,
    /// Measured `‖I − A^{1/2} T A^{1/2}‖₂`.
    pub gamma_precond: f64,
    pub norm_t_norm_a: f64,
    pub rho: f64,
    pub beta: f64,
    pub gamma_total: f64,
    /// `None` when `γ ≥ 1`.
    pub rate: Option<f64>,
    /// `None` when the floor's denominator is non-positive.
    pub floor: Option<f64>,
}

impl BoundReport {
    /// Evaluates all bounds at `rho`, which must lie in `(λ₁, λ₂)`.
    pub fn evaluate<W: WorkingScalar>(a: &DenseMatrix<W>, p: &Preconditioner<W>, rho: f64) -> Result<Self> {
        let n = a.nrows();
        let u_h = PrecisionTag::Working.unit_roundoff();
        let u_l = PrecisionTag::Lower.unit_roundoff();
        let spectrum: Vec<f64> = small_herm_eig(a)?.values.iter().map(|v| v.to_f64()).collect();
        if spectrum.len() < 2 || spectrum[0] <= 0.0 {
            return Err(Error::AssumptionViolated("need n >= 2 and a positive definite matrix".into()));
        }
        let (l1, l2, ln) = (spectrum[0], spectrum[1], spectrum[n - 1]);
        let eps_a = epsilon_a(n, u_h)?;
        let eps_r = epsilon_r(n, u_h, eps_a)?;
        let eps_t = epsilon_t(n, ln / l1, u_l).ok();
        let gamma_precond = measure_gamma_precond(a, p)?;
        let norm_t_norm_a = measure_norm_product(a, p)?;
        let beta = beta(rho, l1, l2, ln)?;
        let gamma_total = gamma_total(gamma_precond, norm_t_norm_a, beta, u_h, eps_r)?;
        Ok(Self {
            eps_a,
            eps_r,
            eps_t,
            gamma_precond,
            norm_t_norm_a,
            rho,
            beta,
            gamma_total,
            rate: rate_bound(gamma_total, l1, l2).ok(),
            floor: accuracy_floor(gamma_precond, norm_t_norm_a, u_h, eps_r, l1, ln).ok(),
        })
    }
}
