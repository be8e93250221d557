//! Conditional Laplace transforms of the mgd given its leading coordinates.

use super::pdf::require_id;
use super::series::{hyper_pfm, SeriesParams};
use crate::affine_poly::AffinePolynomial;
use crate::combinat::SubsetIndex;
use crate::{Error, Result};

/// LT of `(X₂, …, X_n)` given `X₁ = x₁`:
/// `S(θ)^{-λ} exp{-[P(0, θ)/S(θ) - 1] x₁/p₁}` with `S = S_{[n]∖{1}}`.
pub fn conditional_lt_closed(p: &AffinePolynomial, lambda: f64, x1: f64, theta_rest: &[f64]) -> Result<f64> {
    let n = p.n();
    if n < 2 {
        return Err(Error::DimensionOutOfRange { n, max: crate::combinat::MAX_DIM });
    }
    if theta_rest.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n - 1, got: theta_rest.len() });
    }
    if !(lambda > 0.0) || !(x1 >= 0.0 && x1.is_finite()) {
        return Err(Error::InvalidParameter(format!("need lambda > 0 and x1 >= 0, got ({lambda}, {x1})")));
    }
    require_id(p)?;
    let rest = SubsetIndex::new(n, crate::combinat::full_mask(n) & !1)?;
    let s = p.s_polynomial(rest)?.evaluate(theta_rest)?;
    if !(s > 0.0) {
        return Err(Error::NonPositiveBase { value: s });
    }
    let mut full = Vec::with_capacity(n);
    full.push(0.0);
    full.extend_from_slice(theta_rest);
    let p0 = p.evaluate(&full)?;
    Ok((-lambda * s.ln() - (p0 / s - 1.0) * x1 / p.scale(0)).exp())
}

/// LT of `(X_{k+1}, …, X_n)` given `(X₁, …, X_k) = x_head` for the
/// exchangeable polynomial `P_n(θ) = -q/p + (1/p)Π(1 + pθ_i)`:
/// `[Π(1+pθ_i)]^{-λ} F_{k-1}(λ,…,λ; qp^{-k}Πx_head / Π(1+pθ_i)) / F_{k-1}(λ,…,λ; qp^{-k}Πx_head)`.
pub fn conditional_lt_exchangeable(
    n: usize,
    p: f64,
    lambda: f64,
    k: usize,
    x_head: &[f64],
    theta_tail: &[f64],
    params: &SeriesParams,
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("exchangeable parameter p = {p} outside (0,1)")));
    }
    if !(1..n).contains(&k) {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if x_head.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: x_head.len() });
    }
    if theta_tail.len() != n - k {
        return Err(Error::DimensionMismatch { expected: n - k, got: theta_tail.len() });
    }
    if !(lambda > 0.0) || x_head.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("need lambda > 0 and positive conditioning values".into()));
    }
    let base: f64 = theta_tail.iter().map(|&t| 1.0 + p * t).product();
    if !(base > 0.0) {
        return Err(Error::NonPositiveBase { value: base });
    }
    let q = 1.0 - p;
    let log_z = x_head.iter().map(|v| v.ln()).sum::<f64>() - k as f64 * p.ln();
    let z = q * log_z.exp();
    let b = vec![lambda; k - 1];
    let num = hyper_pfm(&[], &b, z / base, params)?;
    let den = hyper_pfm(&[], &b, z, params)?;
    Ok(base.powf(-lambda) * num / den)
}
