//! Affine (multilinear) polynomials `P(θ) = Σ_T p_T θ^T` with `p_∅ = 1`.
//!
//! The coefficient table is dense over all `2^n` subsets and indexed by the
//! subset bitmask. [`MgdSpec`] and [`MfgdSpec`] pair a polynomial with shape
//! parameters; their Laplace transforms are `P(θ)^{-λ}` and
//! `P(θ)^{-λ} Π (1 + p_i θ_i)^{-(λ_i - λ)}`.

mod dual;
pub mod io;
mod markov;

pub use dual::{r_derivative, DualTables, IdFailure, IdOptions, IdReport, BORDERLINE_BAND};
pub use markov::{markov_chain_of, markov_polynomial, markov_sqrt_matrix, MarkovChain};

use crate::combinat::{self, full_mask, mask_label, SubsetIndex, MAX_DIM};
use crate::{Error, Result};

/// Evaluates `Σ_T c_T θ^T` over a dense mask-indexed table.
fn eval_table(coeff: &[f64], theta: &[f64]) -> f64 {
    let mut mono = vec![0.0; coeff.len()];
    mono[0] = 1.0;
    let mut acc = coeff[0];
    for mask in 1..coeff.len() {
        let low = mask.trailing_zeros() as usize;
        mono[mask] = mono[mask & (mask - 1)] * theta[low];
        acc += coeff[mask] * mono[mask];
    }
    acc
}

/// A multilinear form without the `p_∅ = 1` normalization, e.g. a partial derivative of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multilinear {
    n: usize,
    coeff: Vec<f64>,
}

impl Multilinear {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeff[mask as usize]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeff
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: theta.len() });
        }
        Ok(eval_table(&self.coeff, theta))
    }
}

/// Affine polynomial with `p_∅ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePolynomial {
    n: usize,
    coeff: Vec<f64>,
}

impl AffinePolynomial {
    /// Builds from a dense table of length `2^n`; entry 0 must be 1.
    pub fn from_coeffs(n: usize, coeff: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
        }
        if coeff.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: coeff.len() });
        }
        if coeff[0] != 1.0 {
            return Err(Error::InvalidParameter(format!("constant term must be 1, got {}", coeff[0])));
        }
        if let Some(i) = coeff.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("coefficient p_{{{}}} is not finite", mask_label(i as u32))));
        }
        Ok(AffinePolynomial { n, coeff })
    }

    /// Builds from `(1-based elements, value)` pairs; unlisted coefficients are 0.
    pub fn from_terms(n: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
        }
        let mut coeff = vec![0.0; 1 << n];
        coeff[0] = 1.0;
        for (elems, v) in terms {
            let s = SubsetIndex::from_elements(n, elems)?;
            if s.is_empty() {
                return Err(Error::InvalidSubset("the constant term is fixed to 1".into()));
            }
            coeff[s.bits() as usize] = *v;
        }
        Self::from_coeffs(n, coeff)
    }

    /// `Π (1 + p_i θ_i)`, the independent case.
    pub fn independent(scales: &[f64]) -> Result<Self> {
        let n = scales.len();
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
        }
        let coeff = (0..1u32 << n)
            .map(|m| combinat::mask_elements(m).map(|i| scales[i]).product())
            .collect();
        Self::from_coeffs(n, coeff)
    }

    /// Exchangeable family `-q/p + (1/p) Π (1 + p θ_i)`, i.e. `p_T = p^{|T|-1}`.
    pub fn exchangeable(n: usize, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("exchangeable p must lie in (0,1), got {p}")));
        }
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
        }
        let coeff = (0..1u32 << n)
            .map(|m| if m == 0 { 1.0 } else { p.powi(m.count_ones() as i32 - 1) })
            .collect();
        Self::from_coeffs(n, coeff)
    }

    /// Returns `p` if this polynomial is the exchangeable `p_T = p^{|T|-1}` member.
    pub fn exchangeable_param(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let p = self.coeff[0b11];
        let cand = Self::exchangeable(self.n, p).ok()?;
        let close = self
            .coeff
            .iter()
            .zip(&cand.coeff)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        close.then_some(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p_T` for a raw mask.
    #[inline]
    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeff[mask as usize]
    }

    pub fn coeff_of(&self, t: &SubsetIndex) -> f64 {
        self.coeff[t.bits() as usize]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeff
    }

    /// `p_i` for the 0-based axis `i`.
    pub fn scale(&self, i: usize) -> f64 {
        self.coeff[1 << i]
    }

    /// `p_{[n]}`.
    pub fn top(&self) -> f64 {
        self.coeff[full_mask(self.n) as usize]
    }

    pub fn full_mask(&self) -> u32 {
        full_mask(self.n)
    }

    /// `P(θ)`.
    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: theta.len() });
        }
        Ok(eval_table(&self.coeff, theta))
    }

    /// `P_T(θ_T)`: keeps `p_S` for `S ⊆ T`, relabelled onto `|T|` variables.
    pub fn restrict(&self, t: SubsetIndex) -> Result<AffinePolynomial> {
        self.check_subset(&t)?;
        if t.is_empty() {
            return Err(Error::InvalidSubset("restriction to the empty set".into()));
        }
        let k = t.cardinality();
        let coeff = (0..1u32 << k).map(|m| self.coeff(combinat::expand(m, t.bits()))).collect();
        Ok(AffinePolynomial { n: k, coeff })
    }

    /// `(∂/∂θ)^T P`: the coefficient of `θ^U` is `p_{T ∪ U}` for `U ∩ T = ∅`.
    pub fn partial_subset(&self, t: SubsetIndex) -> Result<Multilinear> {
        self.check_subset(&t)?;
        let tb = t.bits();
        let coeff = (0..1u32 << self.n)
            .map(|u| if u & tb == 0 { self.coeff(u | tb) } else { 0.0 })
            .collect();
        Ok(Multilinear { n: self.n, coeff })
    }

    /// `S_T = (1/p_{T̄}) (∂/∂θ)^{T̄} P` as a polynomial in the `|T|` variables of `T`.
    pub fn s_polynomial(&self, t: SubsetIndex) -> Result<AffinePolynomial> {
        self.check_subset(&t)?;
        self.s_polynomial_mask(t.bits())
    }

    pub(crate) fn s_polynomial_mask(&self, t: u32) -> Result<AffinePolynomial> {
        if t == 0 {
            return Err(Error::InvalidSubset("S_T needs a nonempty T".into()));
        }
        let tbar = self.full_mask() ^ t;
        let denom = self.coeff(tbar);
        if denom == 0.0 {
            return Err(Error::ZeroCoefficient { subset: mask_label(tbar) });
        }
        let k = t.count_ones() as usize;
        let coeff = (0..1u32 << k)
            .map(|m| self.coeff(tbar | combinat::expand(m, t)) / denom)
            .collect();
        Ok(AffinePolynomial { n: k, coeff })
    }

    /// `P(s_1 θ_1, …, s_n θ_n)`: the law of `(s_1 X_1, …, s_n X_n)`.
    pub fn scaled(&self, s: &[f64]) -> Result<AffinePolynomial> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: s.len() });
        }
        let coeff = (0..1u32 << self.n)
            .map(|m| self.coeff(m) * combinat::mask_elements(m).map(|i| s[i]).product::<f64>())
            .collect();
        Self::from_coeffs(self.n, coeff)
    }

    /// Errors with the first zero coefficient, if any.
    pub fn require_nonzero(&self) -> Result<()> {
        match self.coeff.iter().position(|&c| c == 0.0) {
            Some(i) => Err(Error::ZeroCoefficient { subset: mask_label(i as u32) }),
            None => Ok(()),
        }
    }

    pub fn dual_tables(&self) -> Result<DualTables> {
        DualTables::new(self)
    }

    pub fn check_id(&self) -> Result<IdReport> {
        IdReport::check(self, IdOptions::default())
    }

    fn check_subset(&self, t: &SubsetIndex) -> Result<()> {
        if t.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: t.n() });
        }
        Ok(())
    }
}

/// `(P, λ)`: the mgd with Laplace transform `P(θ)^{-λ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MgdSpec {
    pub p: AffinePolynomial,
    pub lambda: f64,
}

impl MgdSpec {
    pub fn new(p: AffinePolynomial, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(MgdSpec { p, lambda })
    }
}

/// `(P, Λ)` with `Λ = (λ, λ_1, …, λ_n)` and `λ_i ≥ λ > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MfgdSpec {
    pub p: AffinePolynomial,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
}

impl MfgdSpec {
    pub fn new(p: AffinePolynomial, lambda: f64, lambdas: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if lambdas.len() != p.n() {
            return Err(Error::DimensionMismatch { expected: p.n(), got: lambdas.len() });
        }
        if let Some(i) = lambdas.iter().position(|&l| !(l >= lambda) || !l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda_{} = {} is below lambda = {lambda}",
                i + 1,
                lambdas[i]
            )));
        }
        Ok(MfgdSpec { p, lambda, lambdas })
    }

    pub fn base(&self) -> MgdSpec {
        MgdSpec { p: self.p.clone(), lambda: self.lambda }
    }
}

/// Either kind of distribution specification.
#[derive(Clone, Debug, PartialEq)]
pub enum Spec {
    Mgd(MgdSpec),
    Mfgd(MfgdSpec),
}

impl Spec {
    pub fn polynomial(&self) -> &AffinePolynomial {
        match self {
            Spec::Mgd(s) => &s.p,
            Spec::Mfgd(s) => &s.p,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Spec::Mgd(s) => s.lambda,
            Spec::Mfgd(s) => s.lambda,
        }
    }

    pub fn n(&self) -> usize {
        self.polynomial().n()
    }

    /// Shape of each margin: `λ` for mgd, `λ_i` for mfgd.
    pub fn marginal_shapes(&self) -> Vec<f64> {
        match self {
            Spec::Mgd(s) => vec![s.lambda; s.p.n()],
            Spec::Mfgd(s) => s.lambdas.clone(),
        }
    }
}

impl From<MgdSpec> for Spec {
    fn from(s: MgdSpec) -> Self {
        Spec::Mgd(s)
    }
}

impl From<MfgdSpec> for Spec {
    fn from(s: MfgdSpec) -> Self {
        Spec::Mfgd(s)
    }
}

/// Laplace transform `E[exp(-⟨θ, X⟩)]` of the specification.
pub fn lt_value(spec: &Spec, theta: &[f64]) -> Result<f64> {
    let p = spec.polynomial();
    let base = p.evaluate(theta)?;
    if !(base > 0.0) {
        return Err(Error::NonPositiveBase { value: base });
    }
    let mut log = -spec.lambda() * base.ln();
    if let Spec::Mfgd(s) = spec {
        for i in 0..p.n() {
            let extra = s.lambdas[i] - s.lambda;
            let b = 1.0 + p.scale(i) * theta[i];
            if !(b > 0.0) {
                return Err(Error::NonPositiveBase { value: b });
            }
            if extra != 0.0 {
                log -= extra * b.ln();
            }
        }
    }
    Ok(log.exp())
}

/// Means and covariance matrix of the specification.
pub fn theoretical_moments(spec: &Spec) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = spec.polynomial();
    let n = p.n();
    let lam = spec.lambda();
    let shapes = spec.marginal_shapes();
    let mean = (0..n).map(|i| shapes[i] * p.scale(i)).collect();
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        cov[i][i] = shapes[i] * p.scale(i).powi(2);
        for j in (i + 1)..n {
            let c = lam * (p.scale(i) * p.scale(j) - p.coeff((1 << i) | (1 << j)));
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    (mean, cov)
}

/// Correlation matrix implied by [`theoretical_moments`].
pub fn theoretical_correlation(spec: &Spec) -> Vec<Vec<f64>> {
    let (_, cov) = theoretical_moments(spec);
    let n = cov.len();
    let mut corr = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            corr[i][j] = cov[i][j] / (cov[i][i] * cov[j][j]).sqrt();
        }
    }
    corr
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn p2() -> AffinePolynomial {
        AffinePolynomial::from_terms(2, &[(&[1], 3.0), (&[2], 3.0), (&[1, 2], 1.0)]).unwrap()
    }

    pub(crate) fn p3() -> AffinePolynomial {
        AffinePolynomial::from_terms(
            3,
            &[
                (&[1], 1.0),
                (&[2], 1.0),
                (&[3], 1.0),
                (&[1, 2], 0.55),
                (&[1, 3], 0.45),
                (&[2, 3], 0.5),
                (&[1, 2, 3], 0.2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = p2();
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(p.evaluate(&[1.0, 1.0]).unwrap(), 8.0);
        assert_eq!(p.evaluate(&[1.0, 0.0]).unwrap(), 4.0);
        assert!(matches!(p.evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn restrict_examples() {
        let p = p3();
        let r1 = p.restrict(SubsetIndex::from_elements(3, &[1]).unwrap()).unwrap();
        assert_eq!(r1.coeffs(), &[1.0, 1.0]);
        let full = p.restrict(SubsetIndex::full(3).unwrap()).unwrap();
        assert_eq!(full, p);
        let r23 = p.restrict(SubsetIndex::from_elements(3, &[2, 3]).unwrap()).unwrap();
        assert_eq!(r23.coeffs(), &[1.0, 1.0, 1.0, 0.5]);
        assert!(p.restrict(SubsetIndex::empty(3).unwrap()).is_err());
        // equals P with the other variables set to 0
        let th = [0.0, 0.3, 0.7];
        assert!((r23.evaluate(&[0.3, 0.7]).unwrap() - p.evaluate(&th).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn partial_examples() {
        let p = p2();
        let d1 = p.partial_subset(SubsetIndex::from_elements(2, &[1]).unwrap()).unwrap();
        // 3 + θ2
        assert_eq!(d1.coeffs(), &[3.0, 0.0, 1.0, 0.0]);
        let d0 = p.partial_subset(SubsetIndex::empty(2).unwrap()).unwrap();
        assert_eq!(d0.coeffs(), p.coeffs());
        let dn = p.partial_subset(SubsetIndex::full(2).unwrap()).unwrap();
        assert_eq!(dn.evaluate(&[5.0, -2.0]).unwrap(), 1.0);
    }

    #[test]
    fn s_polynomial_examples() {
        let p = p3();
        let s23 = p.s_polynomial(SubsetIndex::from_elements(3, &[2, 3]).unwrap()).unwrap();
        assert_eq!(s23.coeffs(), &[1.0, 0.55, 0.45, 0.2]);
        let s2 = p.s_polynomial(SubsetIndex::from_elements(3, &[2]).unwrap()).unwrap();
        assert!((s2.coeff(1) - 0.2 / 0.45).abs() < 1e-15);
        let sfull = p.s_polynomial(SubsetIndex::full(3).unwrap()).unwrap();
        assert_eq!(sfull, p);
        let z = AffinePolynomial::from_terms(2, &[(&[1], 1.0), (&[1, 2], 0.5)]).unwrap();
        assert!(matches!(
            z.s_polynomial(SubsetIndex::from_elements(2, &[1]).unwrap()),
            Err(Error::ZeroCoefficient { .. })
        ));
    }

    #[test]
    fn lt_examples() {
        let mgd: Spec = MgdSpec::new(p2(), 2.0).unwrap().into();
        assert_eq!(lt_value(&mgd, &[0.0, 0.0]).unwrap(), 1.0);
        assert!((lt_value(&mgd, &[1.0, 1.0]).unwrap() - 0.015625).abs() < 1e-15);
        let deg: Spec = MfgdSpec::new(p2(), 2.0, vec![2.0, 2.0]).unwrap().into();
        assert_eq!(lt_value(&deg, &[0.4, 0.1]).unwrap(), lt_value(&mgd, &[0.4, 0.1]).unwrap());
        assert!(matches!(lt_value(&mgd, &[-1.0, -1.0]), Err(Error::NonPositiveBase { .. })));
        assert!(MfgdSpec::new(p2(), 2.0, vec![1.0, 3.0]).is_err());
    }

    #[test]
    fn moments_examples() {
        let c = theoretical_correlation(&MgdSpec::new(p2(), 2.0).unwrap().into());
        assert!((c[0][1] - 8.0 / 9.0).abs() < 1e-15);
        let q2 = AffinePolynomial::from_terms(
            2,
            &[(&[1], 15.0 / 13.0), (&[2], 3.0 / 13.0), (&[1, 2], 1.0 / 13.0)],
        )
        .unwrap();
        let c = theoretical_correlation(&MgdSpec::new(q2, 2.0).unwrap().into());
        assert!((c[0][1] - 32.0 / 45.0).abs() < 1e-14);
        let mf: Spec = MfgdSpec::new(p2(), 2.0, vec![3.0, 4.0]).unwrap().into();
        let c = theoretical_correlation(&mf);
        assert!((c[0][1] - 2.0 / 12f64.sqrt() * 8.0 / 9.0).abs() < 1e-15);
        assert!((c[0][1] - 0.513).abs() < 5e-4);
    }

    #[test]
    fn moments_match_log_lt_derivatives() {
        // -λ log P(θ): gradient at 0 gives -mean, Hessian gives cov
        let spec: Spec = MgdSpec::new(p3(), 1.7).unwrap().into();
        let (mean, cov) = theoretical_moments(&spec);
        // P - 1 evaluated without the constant so log1p keeps full precision
        let mut shifted = spec.polynomial().coeffs().to_vec();
        shifted[0] = 0.0;
        let f = |th: &[f64]| -spec.lambda() * eval_table(&shifted, th).ln_1p();
        let h = 1e-5;
        for i in 0..3 {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            a[i] = h;
            b[i] = -h;
            let g = (f(&a) - f(&b)) / (2.0 * h);
            assert!((-g - mean[i]).abs() < 1e-6);
            for j in 0..3 {
                let mut pts = [[0.0; 3]; 4];
                pts[0][i] += h;
                pts[0][j] += h;
                pts[1][i] += h;
                pts[1][j] -= h;
                pts[2][i] -= h;
                pts[2][j] += h;
                pts[3][i] -= h;
                pts[3][j] -= h;
                let d2 = (f(&pts[0]) - f(&pts[1]) - f(&pts[2]) + f(&pts[3])) / (4.0 * h * h);
                assert!((d2 - cov[i][j]).abs() < 1e-6, "({i},{j}): {d2} vs {}", cov[i][j]);
            }
        }
    }

    #[test]
    fn exchangeable_roundtrip() {
        let e = AffinePolynomial::exchangeable(4, 0.3).unwrap();
        assert!((e.coeff(0b1011) - 0.09).abs() < 1e-15);
        assert_eq!(e.exchangeable_param(), Some(0.3));
        assert_eq!(p3().exchangeable_param(), None);
    }

    #[test]
    fn scaled_copy() {
        let q3 = p3().scaled(&[1.0, 4.0, 5.0]).unwrap();
        let want = [1.0, 1.0, 4.0, 2.2, 5.0, 2.25, 10.0, 4.0];
        for (a, b) in q3.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
