//! Quadrivariate sampler: forty Poisson mixture weights feeding univariate,
//! bivariate and trivariate draws on the `S_T` polynomials.

use super::bivariate::{check_lambda, BgdSampler};
use super::trivariate::{prepare, truncated_pgf, TgdSampler, TgdVariant};
use super::{gamma_unchecked, poisson_unchecked, RngStream, RowSampler};
use crate::affine_poly::{AffinePolynomial, DualTables};
use crate::{Error, Result};

/// Mixture weights `α₁..α₄₀` of the quadrivariate decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaTable4 {
    pub alpha: [f64; 40],
}

impl AlphaTable4 {
    /// `α_i` with the 1-based index used in the decomposition.
    pub fn get(&self, i: usize) -> f64 {
        self.alpha[i - 1]
    }
}

/// 1-based `V` indices summed into each shape, in the order
/// `Y₂, Y₃, Y₄, (U₁,₂, U₁,₃), (U₂,₂, U₂,₄), (U₃,₃, U₃,₄)`. Repeated indices
/// carry coefficient 2. The `W` shape is `λ + Σ_{i=13}^{40} V_i`.
pub const SHAPE_SUMS4: [&[usize]; 6] = [
    &[1, 7, 8, 14, 17, 17, 20, 21, 26, 27, 32, 32, 33, 33, 38, 39],
    &[2, 9, 10, 15, 18, 18, 20, 22, 28, 29, 34, 34, 35, 35, 38, 40],
    &[3, 11, 12, 16, 19, 19, 21, 22, 30, 31, 36, 36, 37, 37, 39, 40],
    &[4, 7, 9, 23, 26, 28, 32, 34, 38],
    &[5, 8, 11, 24, 27, 30, 33, 36, 39],
    &[6, 10, 12, 25, 29, 31, 35, 37, 40],
];

const M2: u32 = 0b0010;
const M3: u32 = 0b0100;
const M4: u32 = 0b1000;
const M23: u32 = 0b0110;
const M24: u32 = 0b1010;
const M34: u32 = 0b1100;
const M234: u32 = 0b1110;

pub fn quadrivariate_alphas(p: &AffinePolynomial) -> Result<AlphaTable4> {
    let d = prepare(p, 4)?;
    Ok(alphas_from(&d))
}

fn alphas_from(d: &DualTables) -> AlphaTable4 {
    let b = |e: &[u32]| d.b_tilde(e.iter().map(|i| 1u32 << (i - 1)).sum());
    let (b12, b13, b14) = (b(&[1, 2]), b(&[1, 3]), b(&[1, 4]));
    let (b23, b24, b34) = (b(&[2, 3]), b(&[2, 4]), b(&[3, 4]));
    let (b123, b124, b134, b234) = (b(&[1, 2, 3]), b(&[1, 2, 4]), b(&[1, 3, 4]), b(&[2, 3, 4]));
    let b1234 = b(&[1, 2, 3, 4]);
    let q = |m: u32| -d.p_tilde(m);
    let (q2, q3, q4) = (q(M2), q(M3), q(M4));
    let (q23, q24, q34, q234) = (q(M23), q(M24), q(M34), q(M234));
    AlphaTable4 {
        alpha: [
            b12 / q2,
            b13 / q3,
            b14 / q4,
            b123 / q23,
            b124 / q24,
            b134 / q34,
            b12 * b23 / (q2 * q23),
            b12 * b24 / (q2 * q24),
            b13 * b23 / (q3 * q23),
            b13 * b34 / (q3 * q34),
            b14 * b24 / (q4 * q24),
            b14 * b34 / (q4 * q34),
            b1234 / q234,
            (b12 * b234 + b23 * b124 + b24 * b123) / (q2 * q234),
            (b13 * b234 + b23 * b134 + b34 * b123) / (q3 * q234),
            (b14 * b234 + b24 * b134 + b34 * b124) / (q4 * q234),
            2.0 * b12 * b23 * b24 / (q2 * q2 * q234),
            2.0 * b13 * b23 * b34 / (q3 * q3 * q234),
            2.0 * b14 * b24 * b34 / (q4 * q4 * q234),
            b23 * (b12 * b34 + b13 * b24) / (q2 * q3 * q234),
            b24 * (b12 * b34 + b14 * b23) / (q2 * q4 * q234),
            b34 * (b13 * b24 + b14 * b23) / (q3 * q4 * q234),
            b123 * b234 / (q23 * q234),
            b124 * b234 / (q24 * q234),
            b134 * b234 / (q34 * q234),
            b23 * (b12 * b234 + b24 * b123) / (q2 * q23 * q234),
            b24 * (b12 * b234 + b23 * b124) / (q2 * q24 * q234),
            b23 * (b13 * b234 + b34 * b123) / (q3 * q23 * q234),
            b34 * (b13 * b234 + b23 * b134) / (q3 * q34 * q234),
            b24 * (b14 * b234 + b34 * b124) / (q4 * q24 * q234),
            b34 * (b14 * b234 + b24 * b134) / (q4 * q34 * q234),
            b12 * b23 * b23 * b24 / (q2 * q2 * q23 * q234),
            b12 * b23 * b24 * b24 / (q2 * q2 * q24 * q234),
            b13 * b23 * b23 * b34 / (q3 * q3 * q23 * q234),
            b13 * b23 * b34 * b34 / (q3 * q3 * q34 * q234),
            b14 * b34 * b24 * b24 / (q4 * q4 * q24 * q234),
            b14 * b24 * b34 * b34 / (q4 * q4 * q34 * q234),
            b23 * b23 * (b12 * b34 + b13 * b24) / (q2 * q3 * q23 * q234),
            b24 * b24 * (b12 * b34 + b14 * b23) / (q2 * q4 * q24 * q234),
            b34 * b34 * (b13 * b24 + b14 * b23) / (q3 * q4 * q34 * q234),
        ],
    }
}

/// `coef[g][i]`: multiplicity of `V_{i+1}` in shape group `g` (the six
/// groups of [`SHAPE_SUMS4`], then `W` for `i ≥ 12`).
fn shape_coefficients() -> [[f64; 40]; 7] {
    let mut c = [[0.0; 40]; 7];
    for (g, list) in SHAPE_SUMS4.iter().enumerate() {
        for &i in *list {
            c[g][i - 1] += 1.0;
        }
    }
    for i in 12..40 {
        c[6][i] = 1.0;
    }
    c
}

/// Quadrivariate law of `(P₄, λ)`. Per row, in this order: `X₁ ~ γ(p₁, λ)`;
/// `V_i ~ P(α_i X₁)` for `i = 1..40`; `Y₂, Y₃, Y₄` with scales `1/(-p̃_i)`;
/// the pairs from `S₂₃`, `S₂₄`, `S₃₄`; the triple from `S₂₃₄` with shape
/// `λ + Σ_{i≥13} V_i`; then `X₂ = Y₂+U₁,₂+U₂,₂+W₂`, `X₃ = Y₃+U₁,₃+U₃,₃+W₃`,
/// `X₄ = Y₄+U₂,₄+U₃,₄+W₄`.
#[derive(Clone, Debug)]
pub struct QgdSampler {
    lambda: f64,
    scale1: f64,
    alphas: AlphaTable4,
    coef: [[f64; 40]; 7],
    scale_y: [f64; 3],
    pairs: [BgdSampler; 3],
    triple: TgdSampler,
}

impl QgdSampler {
    pub fn new(p: &AffinePolynomial, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let d = prepare(p, 4)?;
        let pair = |m| BgdSampler::with_shape_free(&p.s_polynomial_mask(m)?);
        Ok(QgdSampler {
            lambda,
            scale1: p.coeff(1),
            alphas: alphas_from(&d),
            coef: shape_coefficients(),
            scale_y: [-1.0 / d.p_tilde(M2), -1.0 / d.p_tilde(M3), -1.0 / d.p_tilde(M4)],
            pairs: [pair(M23)?, pair(M24)?, pair(M34)?],
            triple: TgdSampler::with_shape_free(&p.s_polynomial_mask(M234)?, TgdVariant::A)?,
        })
    }

    pub fn alphas(&self) -> &AlphaTable4 {
        &self.alphas
    }
}

impl RowSampler for QgdSampler {
    fn dim(&self) -> usize {
        4
    }

    fn algorithm(&self) -> &'static str {
        "qgd"
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        let x1 = gamma_unchecked(self.lambda, self.scale1, rng);
        let mut v = [0.0; 40];
        for (vi, a) in v.iter_mut().zip(self.alphas.alpha) {
            *vi = poisson_unchecked(a * x1, rng) as f64;
        }
        let z: Vec<f64> = self.coef.iter().map(|c| c.iter().zip(&v).map(|(ci, vi)| ci * vi).sum()).collect();
        let y: Vec<f64> = (0..3).map(|j| gamma_unchecked(z[j], self.scale_y[j], rng)).collect();
        let u1 = self.pairs[0].draw_shape(z[3], rng);
        let u2 = self.pairs[1].draw_shape(z[4], rng);
        let u3 = self.pairs[2].draw_shape(z[5], rng);
        let w = self.triple.draw_shape(self.lambda + z[6], rng);
        out[0] = x1;
        out[1] = y[0] + u1[0] + u2[0] + w[0];
        out[2] = y[1] + u1[1] + u3[0] + w[1];
        out[3] = y[2] + u2[1] + u3[1] + w[2];
    }
}

/// Conditional LT of `(X₂, X₃, X₄)` given `X₁ = x₁` as the forty-fold
/// Poisson mixture `Σ_v Π P(V_i = v_i) S₂^{-z₁}S₃^{-z₂}S₄^{-z₃}S₂₃^{-z₄}S₂₄^{-z₅}S₃₄^{-z₆}S₂₃₄^{-(λ+z₇)}`,
/// each `v_i` truncated past its Poisson tail. The truncated sum factorizes
/// exactly into one-dimensional sums.
pub fn mixture_lt4(p: &AffinePolynomial, lambda: f64, x1: f64, theta: [f64; 3]) -> Result<f64> {
    let d = prepare(p, 4)?;
    let a = alphas_from(&d);
    let [t2, t3, t4] = theta;
    let s = [
        1.0 + t2 / -d.p_tilde(M2),
        1.0 + t3 / -d.p_tilde(M3),
        1.0 + t4 / -d.p_tilde(M4),
        p.s_polynomial_mask(M23)?.evaluate(&[t2, t3])?,
        p.s_polynomial_mask(M24)?.evaluate(&[t2, t4])?,
        p.s_polynomial_mask(M34)?.evaluate(&[t3, t4])?,
        p.s_polynomial_mask(M234)?.evaluate(&theta)?,
    ];
    if let Some(&bad) = s.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::NonPositiveBase { value: bad });
    }
    let coef = shape_coefficients();
    let mut mix = s[6].powf(-lambda);
    for i in 0..40 {
        let g: f64 = (0..7).map(|k| s[k].powf(-coef[k][i])).product();
        mix *= truncated_pgf(a.alpha[i] * x1, g);
    }
    Ok(mix)
}
