//! Algebraic identities of the dual tables and `S_T` polynomials, as
//! numerical residuals. Each function returns the largest error found.

use crate::affine_poly::{r_derivative, AffinePolynomial};
use crate::combinat::{compress, mask_elements, submasks};
use crate::samplers::{mixture_lt3, mixture_lt4};
use crate::specfun::conditional_lt_closed;
use crate::Result;

/// `max |r_T(closed form) - r_T(derivative)|` over `2 ≤ |T| ≤ 5`.
pub fn r_closed_form_residual(p: &AffinePolynomial) -> Result<f64> {
    let d = p.dual_tables()?;
    let mut worst = 0.0f64;
    for t in 1..=p.full_mask() {
        let k = t.count_ones();
        if (2..=5).contains(&k) {
            worst = worst.max((d.r(t) - r_derivative(p, &d.theta_p, t)).abs());
        }
    }
    Ok(worst)
}

/// Relative error of `P(θ) = p_{[n]} (θ-θ_P)^{[n]} [1 - R((θ-θ_P)^{-1})]` at `theta`.
pub fn taylor_residual(p: &AffinePolynomial, theta: &[f64]) -> Result<f64> {
    let d = p.dual_tables()?;
    let shift: Vec<f64> = theta.iter().zip(&d.theta_p).map(|(t, tp)| t - tp).collect();
    let mut r = 0.0;
    for t in 1..=p.full_mask() {
        if t.count_ones() >= 2 {
            r += d.r(t) * mask_elements(t).map(|i| 1.0 / shift[i]).product::<f64>();
        }
    }
    let rhs = p.top() * shift.iter().product::<f64>() * (1.0 - r);
    let lhs = p.evaluate(theta)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
}

/// Largest violation over all nonempty `U ⊆ T ⊆ [n]` of `p̃_U(S_T) = p̃_U(P)`,
/// `b̃_U(S_T) = b̃_U(P)` (`|U| ≥ 2`) and `S_U(S_T) = S_U(P)` coefficientwise.
/// Errors are relative to the compared magnitude (absolute below 1).
pub fn s_polynomial_residual(p: &AffinePolynomial) -> Result<f64> {
    let d = p.dual_tables()?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut worst = 0.0f64;
    for t in 1..=p.full_mask() {
        let st = p.s_polynomial_mask(t)?;
        let ds = st.dual_tables()?;
        for u in submasks(t).filter(|&u| u != 0) {
            let cu = compress(u, t);
            worst = worst.max(rel(ds.p_tilde(cu), d.p_tilde(u)));
            if u.count_ones() >= 2 {
                worst = worst.max(rel(ds.b_tilde(cu), d.b_tilde(u)));
            }
            let a = st.s_polynomial_mask(cu)?;
            let b = p.s_polynomial_mask(u)?;
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                worst = worst.max(rel(*x, *y));
            }
        }
    }
    Ok(worst)
}

/// Relative error of `(-p̃)^T S^T = (-p̃_T) S_T + Σ_{T'⊆T, |T'|>1} r_{T'} (-p̃)^{T∖T'} S^{T∖T'}`
/// at `theta`, for every nonempty `T`. Here `(-p̃_i) S_i(θ_i) = θ_i - p̃_i`.
pub fn product_relation_residual(p: &AffinePolynomial, theta: &[f64]) -> Result<f64> {
    let d = p.dual_tables()?;
    let lin = |m: u32| mask_elements(m).map(|i| theta[i] - d.theta_p[i]).product::<f64>();
    let mut worst = 0.0f64;
    for t in 1..=p.full_mask() {
        let sub: Vec<f64> = mask_elements(t).map(|i| theta[i]).collect();
        let mut rhs = -d.p_tilde(t) * p.s_polynomial_mask(t)?.evaluate(&sub)?;
        for t2 in submasks(t).filter(|m| m.count_ones() >= 2) {
            rhs += d.r(t2) * lin(t ^ t2);
        }
        let lhs = lin(t);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(worst)
}

/// `max |mixture - closed form|` of the conditional LT over the 9 points
/// `x₁ ∈ {0.5, 1, 2}` × three `θ` directions, for `n ∈ {3, 4}`.
pub fn mixture_residual(p: &AffinePolynomial, lambda: f64) -> Result<f64> {
    let n = p.n();
    let thetas: [[f64; 3]; 3] = [[0.1, 0.2, 0.05], [0.3, 0.05, 0.2], [0.5, 0.5, 0.5]];
    let mut worst = 0.0f64;
    for x1 in [0.5, 1.0, 2.0] {
        for th in &thetas {
            let rest = &th[..n - 1];
            let closed = conditional_lt_closed(p, lambda, x1, rest)?;
            let mix = match n {
                3 => mixture_lt3(p, lambda, x1, [th[0], th[1]])?,
                4 => mixture_lt4(p, lambda, x1, *th)?,
                _ => return Err(crate::Error::DimensionMismatch { expected: 4, got: n }),
            };
            worst = worst.max((mix - closed).abs());
        }
    }
    Ok(worst)
}

/// Deterministic test points `θ_i ∈ (0, 1)` for an `n`-dimensional polynomial.
pub fn identity_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| (0..n).map(|i| 0.1 + 0.8 * (((k + 1) * (i + 2)) as f64 * 0.618_033_988_75).fract()).collect())
        .collect()
}

/// Every polynomial identity above on `p`, over [`identity_points`].
pub fn all_identity_residuals(p: &AffinePolynomial) -> Result<Vec<(&'static str, f64)>> {
    let pts = identity_points(p.n(), 8);
    let mut taylor = 0.0f64;
    let mut product = 0.0f64;
    for th in &pts {
        taylor = taylor.max(taylor_residual(p, th)?);
        product = product.max(product_relation_residual(p, th)?);
    }
    Ok(vec![
        ("r_closed_form", r_closed_form_residual(p)?),
        ("taylor", taylor),
        ("s_polynomial", s_polynomial_residual(p)?),
        ("product_relation", product),
    ])
}
