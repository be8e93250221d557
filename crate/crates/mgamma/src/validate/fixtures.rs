//! Named example distributions used by the suite and the tests.

use crate::affine_poly::{markov_polynomial, markov_sqrt_matrix, AffinePolynomial, MfgdSpec, MgdSpec, Spec};
use crate::samplers::Algorithm;
use crate::{Error, Result};

/// `P₂ = 1 + 3θ₁ + 3θ₂ + θ₁θ₂`; correlation 8/9.
pub fn p2() -> AffinePolynomial {
    AffinePolynomial::from_coeffs(2, vec![1.0, 3.0, 3.0, 1.0]).expect("valid fixture")
}

/// `Q₂ = 1 + (15/13)θ₁ + (3/13)θ₂ + (1/13)θ₁θ₂`; correlation 32/45.
pub fn q2() -> AffinePolynomial {
    AffinePolynomial::from_coeffs(2, vec![1.0, 15.0 / 13.0, 3.0 / 13.0, 1.0 / 13.0]).expect("valid fixture")
}

/// Trivariate polynomial with unit margins and correlations `(0.45, 0.55, 0.5)`.
pub fn p3() -> AffinePolynomial {
    AffinePolynomial::from_terms(
        3,
        &[(&[1], 1.0), (&[2], 1.0), (&[3], 1.0), (&[1, 2], 0.55), (&[1, 3], 0.45), (&[2, 3], 0.5), (&[1, 2, 3], 0.2)],
    )
    .expect("valid fixture")
}

/// Symmetric quadrivariate polynomial with `p_T = s_{|T|}`, `s = (4.75, 3.5, 2, 1)`.
pub fn symmetric_p4() -> AffinePolynomial {
    let s = [4.75, 3.5, 2.0, 1.0];
    let coeff = (0..16u32).map(|m| if m == 0 { 1.0 } else { s[m.count_ones() as usize - 1] }).collect();
    AffinePolynomial::from_coeffs(4, coeff).expect("valid fixture")
}

/// Subsets of `[4]` in the listing order `1,2,3,4,12,13,14,23,24,34,123,124,134,234,1234`.
pub const Q4_ORDER: [&[usize]; 15] = [
    &[1], &[2], &[3], &[4], &[1, 2], &[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4],
    &[1, 2, 3], &[1, 2, 4], &[1, 3, 4], &[2, 3, 4], &[1, 2, 3, 4],
];

/// Perturbed quadrivariate polynomial, coefficients in [`Q4_ORDER`].
pub const Q4_COEFFS: [f64; 15] =
    [4.75, 4.8, 4.85, 4.7, 3.5, 3.55, 3.6, 3.65, 3.45, 3.4, 2.0, 1.99, 2.02, 2.01, 1.0];

/// Published `b̃` values for [`q4`], in [`Q4_ORDER`].
pub const Q4_B_TILDE: [f64; 15] = [
    -2.01, -2.02, -1.99, -2.0, 0.6602, 0.5499, 0.37, 0.4198, 0.49, 0.48, 0.111404, 0.2177, 0.3989, 0.5053, 1.590846,
];

pub fn q4() -> AffinePolynomial {
    let terms: Vec<(&[usize], f64)> = Q4_ORDER.iter().copied().zip(Q4_COEFFS).collect();
    AffinePolynomial::from_terms(4, &terms).expect("valid fixture")
}

/// Lag-one correlations of the five-dimensional Markov example.
pub const MARKOV_RHO: [f64; 4] = [0.81, 0.64, 0.49, 0.36];

pub fn markov_p5() -> AffinePolynomial {
    markov_polynomial(&markov_sqrt_matrix(&MARKOV_RHO).expect("valid chain"), None).expect("valid fixture")
}

/// A sampler fixture: distribution, algorithm and sample size multiplier.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub spec: Spec,
    pub algorithm: Algorithm,
    /// Correlation tolerance for the sample at the default size.
    pub corr_tol: f64,
    /// Rows relative to the configured base size.
    pub size_factor: f64,
}

/// Names accepted by [`fixture`], in suite order.
pub const FIXTURE_NAMES: [&str; 11] = [
    "bgd-p2",
    "bgd-q2",
    "mfgd-p2",
    "mfgd-q2",
    "exchangeable-3",
    "tgd-a-p3",
    "tgd-b-p3",
    "qgd-p4",
    "qgd-q4",
    "markov-p5",
    "corrupted-bgd",
];

fn mgd(p: AffinePolynomial, lambda: f64) -> Spec {
    Spec::Mgd(MgdSpec::new(p, lambda).expect("valid fixture"))
}

fn mfgd(p: AffinePolynomial) -> Spec {
    Spec::Mfgd(MfgdSpec::new(p, 2.0, vec![3.0, 4.0]).expect("valid fixture"))
}

/// Looks up a sampler fixture by name. `corrupted-bgd` is a non-id
/// polynomial, for the error path.
pub fn fixture(name: &str) -> Result<Fixture> {
    let f = |name, spec, algorithm, corr_tol| Fixture { name, spec, algorithm, corr_tol, size_factor: 1.0 };
    Ok(match name {
        "bgd-p2" => f("bgd-p2", mgd(p2(), 2.0), Algorithm::Bgd, 0.01),
        "bgd-q2" => f("bgd-q2", mgd(q2(), 2.0), Algorithm::Bgd, 0.01),
        "mfgd-p2" => f("mfgd-p2", mfgd(p2()), Algorithm::Mfgd, 0.015),
        "mfgd-q2" => f("mfgd-q2", mfgd(q2()), Algorithm::Mfgd, 0.015),
        "exchangeable-3" => f(
            "exchangeable-3",
            mgd(AffinePolynomial::exchangeable(3, 0.3).expect("valid fixture"), 2.0),
            Algorithm::Exchangeable,
            0.01,
        ),
        "tgd-a-p3" => f("tgd-a-p3", mgd(p3(), 2.0), Algorithm::TgdA, 0.01),
        "tgd-b-p3" => f("tgd-b-p3", mgd(p3(), 2.0), Algorithm::TgdB, 0.01),
        "qgd-p4" => f("qgd-p4", mgd(symmetric_p4(), 2.0), Algorithm::Qgd, 0.01),
        "qgd-q4" => f("qgd-q4", mgd(q4(), 2.0), Algorithm::Qgd, 0.01),
        "markov-p5" => Fixture {
            size_factor: 2.5,
            ..f("markov-p5", mgd(markov_p5(), 2.0), Algorithm::Markov, 0.01)
        },
        "corrupted-bgd" => f(
            "corrupted-bgd",
            mgd(AffinePolynomial::from_coeffs(2, vec![1.0, 1.0, 1.0, 2.0]).expect("valid coefficients"), 1.0),
            Algorithm::Bgd,
            0.01,
        ),
        other => return Err(Error::InvalidParameter(format!("unknown fixture {other:?}"))),
    })
}
