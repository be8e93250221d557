//! Exchangeable and bivariate samplers.

use super::{gamma_unchecked, poisson_unchecked, RngStream, RowSampler};
use crate::affine_poly::AffinePolynomial;
use crate::specfun::require_id;
use crate::{Error, Result};

/// Law with `P_n(θ) = -q/p + (1/p)Π(1 + pθ_i)`:
/// `X₁ ~ γ(1, λ)`, `V ~ P(q X₁/p)`, `X_i ~ γ(p, λ + V)` for `i ≥ 2`.
#[derive(Clone, Debug)]
pub struct ExchangeableSampler {
    n: usize,
    p: f64,
    lambda: f64,
}

impl ExchangeableSampler {
    pub fn new(n: usize, p: f64, lambda: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("exchangeable parameter p = {p} outside (0,1)")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("exchangeable sampler needs n >= 2, got {n}")));
        }
        check_lambda(lambda)?;
        Ok(ExchangeableSampler { n, p, lambda })
    }
}

impl RowSampler for ExchangeableSampler {
    fn dim(&self) -> usize {
        self.n
    }

    fn algorithm(&self) -> &'static str {
        "exchangeable"
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        let x1 = gamma_unchecked(self.lambda, 1.0, rng);
        let v = poisson_unchecked((1.0 - self.p) / self.p * x1, rng);
        out[0] = x1;
        for o in &mut out[1..] {
            *o = gamma_unchecked(self.lambda + v as f64, self.p, rng);
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    Ok(())
}

/// Bivariate law of `(P₂, λ)`:
/// `X₁ ~ γ(p₁, λ)`, `V ~ P((p₁₂/p₁) b̃₁₂ X₁)`, `X₂ ~ γ(p₁₂/p₁, λ + V)`.
#[derive(Clone, Debug)]
pub struct BgdSampler {
    lambda: f64,
    scale1: f64,
    rate: f64,
    scale2: f64,
}

impl BgdSampler {
    pub fn new(p: &AffinePolynomial, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let mut s = Self::with_shape_free(p)?;
        s.lambda = lambda;
        Ok(s)
    }

    /// Constants of the polynomial only; the shape is supplied per draw.
    pub(crate) fn with_shape_free(p: &AffinePolynomial) -> Result<Self> {
        if p.n() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.n() });
        }
        let d = require_id(p)?;
        let (p1, p12) = (p.coeff(1), p.coeff(3));
        Ok(BgdSampler { lambda: 0.0, scale1: p1, rate: (p12 / p1) * d.b_tilde(3), scale2: p12 / p1 })
    }

    /// One draw from `(P₂, shape)`; shape 0 gives `(0, 0)`.
    #[inline]
    pub(crate) fn draw_shape(&self, shape: f64, rng: &mut RngStream) -> [f64; 2] {
        let x1 = gamma_unchecked(shape, self.scale1, rng);
        let v = poisson_unchecked(self.rate * x1, rng);
        [x1, gamma_unchecked(shape + v as f64, self.scale2, rng)]
    }
}

impl RowSampler for BgdSampler {
    fn dim(&self) -> usize {
        2
    }

    fn algorithm(&self) -> &'static str {
        "bgd"
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        out.copy_from_slice(&self.draw_shape(self.lambda, rng));
    }
}
