//! Trivariate sampler and its Poisson-mixture weights.

use super::bivariate::{check_lambda, BgdSampler};
use super::{gamma_unchecked, poisson_unchecked, RngStream, RowSampler};
use crate::affine_poly::{AffinePolynomial, DualTables};
use crate::specfun::require_id;
use crate::{Error, Result};

/// Mixture weights `α₁..α₅` of the trivariate decomposition:
/// `α₁ = b̃₁₂/(-p̃₂)`, `α₂ = b̃₁₃/(-p̃₃)`, `α₃ = b̃₁₂₃/(-p̃₂₃)`,
/// `α₄ = b̃₁₂b̃₂₃/((-p̃₂)(-p̃₂₃))`, `α₅ = b̃₁₃b̃₂₃/((-p̃₃)(-p̃₂₃))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaTable3 {
    pub alpha: [f64; 5],
}

impl AlphaTable3 {
    /// `α_i` with the 1-based index used in the decomposition.
    pub fn get(&self, i: usize) -> f64 {
        self.alpha[i - 1]
    }
}

pub fn trivariate_alphas(p: &AffinePolynomial) -> Result<AlphaTable3> {
    let d = prepare(p, 3)?;
    Ok(alphas_from(&d))
}

/// Checks dimension, nonzero coefficients and infinite divisibility.
pub(crate) fn prepare(p: &AffinePolynomial, n: usize) -> Result<DualTables> {
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.n() });
    }
    p.require_nonzero()?;
    require_id(p)
}

fn alphas_from(d: &DualTables) -> AlphaTable3 {
    let b = |m: u32| d.b_tilde(m);
    let q = |m: u32| -d.p_tilde(m);
    let (b12, b13, b23, b123) = (b(0b011), b(0b101), b(0b110), b(0b111));
    let (q2, q3, q23) = (q(0b010), q(0b100), q(0b110));
    AlphaTable3 { alpha: [b12 / q2, b13 / q3, b123 / q23, b12 * b23 / (q2 * q23), b13 * b23 / (q3 * q23)] }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgdVariant {
    /// `(Z₂, Z₃)` from the bivariate sampler on `S₂₃`.
    A,
    /// `(Z′₂, Z′₃)` from univariate gamma and Poisson draws only.
    B,
}

/// Trivariate law of `(P₃, λ)`. Per row, in this order:
/// `X₁ ~ γ(p₁, λ)`; `V_i ~ P(α_i X₁)` for `i = 1..5`;
/// `Y₂ ~ γ(1/(-p̃₂), V₁+V₄)`; `Y₃ ~ γ(1/(-p̃₃), V₂+V₅)`;
/// `(Z₂, Z₃) ~ (S₂₃, λ+V₃+V₄+V₅)`; `X = (X₁, Y₂+Z₂, Y₃+Z₃)`.
///
/// Variant B draws `Z′₂ ~ γ(p₁₂/p₁, ·)`, `V₆ ~ P(α₆ Z′₂)` with
/// `α₆ = b̃₂₃/(-p̃₃)`, then `Z′₃ ~ γ(1/(-p̃₃), · + V₆)`.
#[derive(Clone, Debug)]
pub struct TgdSampler {
    lambda: f64,
    variant: TgdVariant,
    scale1: f64,
    alphas: AlphaTable3,
    scale_y: [f64; 2],
    pair: BgdSampler,
    scale_z2: f64,
    alpha6: f64,
}

impl TgdSampler {
    pub fn new(p: &AffinePolynomial, lambda: f64, variant: TgdVariant) -> Result<Self> {
        check_lambda(lambda)?;
        let mut s = Self::with_shape_free(p, variant)?;
        s.lambda = lambda;
        Ok(s)
    }

    pub(crate) fn with_shape_free(p: &AffinePolynomial, variant: TgdVariant) -> Result<Self> {
        let d = prepare(p, 3)?;
        let pair = BgdSampler::with_shape_free(&p.s_polynomial_mask(0b110)?)?;
        Ok(TgdSampler {
            lambda: 0.0,
            variant,
            scale1: p.coeff(0b001),
            alphas: alphas_from(&d),
            scale_y: [-1.0 / d.p_tilde(0b010), -1.0 / d.p_tilde(0b100)],
            pair,
            scale_z2: p.coeff(0b011) / p.coeff(0b001),
            alpha6: d.b_tilde(0b110) / -d.p_tilde(0b100),
        })
    }

    pub fn alphas(&self) -> &AlphaTable3 {
        &self.alphas
    }

    #[inline]
    pub(crate) fn draw_shape(&self, shape: f64, rng: &mut RngStream) -> [f64; 3] {
        let x1 = gamma_unchecked(shape, self.scale1, rng);
        let mut v = [0.0; 5];
        for (vi, a) in v.iter_mut().zip(self.alphas.alpha) {
            *vi = poisson_unchecked(a * x1, rng) as f64;
        }
        let y2 = gamma_unchecked(v[0] + v[3], self.scale_y[0], rng);
        let y3 = gamma_unchecked(v[1] + v[4], self.scale_y[1], rng);
        let w = shape + v[2] + v[3] + v[4];
        let z = match self.variant {
            TgdVariant::A => self.pair.draw_shape(w, rng),
            TgdVariant::B => {
                let z2 = gamma_unchecked(w, self.scale_z2, rng);
                let v6 = poisson_unchecked(self.alpha6 * z2, rng);
                [z2, gamma_unchecked(w + v6 as f64, self.scale_y[1], rng)]
            }
        };
        [x1, y2 + z[0], y3 + z[1]]
    }
}

impl RowSampler for TgdSampler {
    fn dim(&self) -> usize {
        3
    }

    fn algorithm(&self) -> &'static str {
        match self.variant {
            TgdVariant::A => "tgd-a",
            TgdVariant::B => "tgd-b",
        }
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        out.copy_from_slice(&self.draw_shape(self.lambda, rng));
    }
}

/// `Σ_{v ≤ cap} P(V = v) g^v` for `V ~ P(μ)`, with `cap` past the Poisson tail.
pub(crate) fn truncated_pgf(mu: f64, g: f64) -> f64 {
    if mu == 0.0 {
        return 1.0;
    }
    let cap = (mu + 12.0 * mu.sqrt() + 30.0).ceil() as usize;
    let mut term = (-mu).exp();
    let mut sum = term;
    for v in 1..=cap {
        term *= mu * g / v as f64;
        sum += term;
    }
    sum
}

/// Conditional LT of `(X₂, X₃)` given `X₁ = x₁` as the Poisson mixture
/// `Σ_v Π P(V_i = v_i) S₂^{-(v₁+v₄)} S₃^{-(v₂+v₅)} S₂₃^{-(λ+v₃+v₄+v₅)}`,
/// each `v_i` truncated past its Poisson tail.
///
/// The truncated five-fold sum factorizes exactly into one-dimensional sums.
pub fn mixture_lt3(p: &AffinePolynomial, lambda: f64, x1: f64, theta: [f64; 2]) -> Result<f64> {
    let d = prepare(p, 3)?;
    let a = alphas_from(&d);
    let s2 = 1.0 + theta[0] / -d.p_tilde(0b010);
    let s3 = 1.0 + theta[1] / -d.p_tilde(0b100);
    let s23 = p.s_polynomial_mask(0b110)?.evaluate(&theta)?;
    if !(s2 > 0.0 && s3 > 0.0 && s23 > 0.0) {
        return Err(Error::NonPositiveBase { value: s2.min(s3).min(s23) });
    }
    let g = [1.0 / s2, 1.0 / s3, 1.0 / s23, 1.0 / (s2 * s23), 1.0 / (s3 * s23)];
    let mix: f64 = (0..5).map(|i| truncated_pgf(a.alpha[i] * x1, g[i])).product();
    Ok(s23.powf(-lambda) * mix)
}
