//! Probability densities of the mgd and mfgd, evaluated in log space.

use super::expansion::{c_alpha_expansion, CoefficientExpansion};
use super::series::{horn_phi3, hyper_pfm, lauricella_fi, lauricella_fii, CompensatedSum, SeriesParams};
use crate::affine_poly::{AffinePolynomial, DualTables, IdOptions, IdReport, MgdSpec};
use crate::{Error, Result};
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Dual tables of `p`, or an error if `p` is not infinitely divisible.
pub(crate) fn require_id(p: &AffinePolynomial) -> Result<DualTables> {
    let d = p.dual_tables()?;
    let rep = IdReport::from_tables(p, &d, IdOptions::default())?;
    if !rep.is_id {
        let first = &rep.failing_conditions[0];
        return Err(Error::NotInfinitelyDivisible(format!(
            "condition on {{{}}} fails: value {:e}",
            first.subset, first.value
        )));
    }
    Ok(d)
}

fn require_dim(p: &AffinePolynomial, n: usize) -> Result<()> {
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.n() });
    }
    Ok(())
}

fn require_x(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN coordinate".into()));
    }
    Ok(())
}

fn in_support(x: &[f64]) -> bool {
    x.iter().all(|&v| v > 0.0 && v.is_finite())
}

fn require_shape(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

/// `exp(log_pref) · series`, which keeps huge series from overflowing alone.
fn combine(log_pref: f64, series: f64) -> f64 {
    if series <= 0.0 {
        return 0.0;
    }
    (log_pref + series.ln()).exp()
}

/// Bivariate gamma density with a single shape `λ` (modified Bessel form):
/// `p₁₂^{-λ}/Γ(λ)² e^{-(p₂/p₁₂)x₁-(p₁/p₁₂)x₂} (x₁x₂)^{λ-1} F₁(λ; b̃₁₂ x₁x₂)`.
pub fn pdf_bgd(p: &AffinePolynomial, lambda: f64, x: &[f64], params: &SeriesParams) -> Result<f64> {
    require_dim(p, 2)?;
    require_shape("lambda", lambda)?;
    require_x(x, 2)?;
    let d = require_id(p)?;
    if !in_support(x) {
        return Ok(0.0);
    }
    let (p1, p2, p12) = (p.coeff(1), p.coeff(2), p.coeff(3));
    let log_pref = -lambda * p12.ln() - 2.0 * ln_gamma(lambda) - (p2 / p12) * x[0] - (p1 / p12) * x[1]
        + (lambda - 1.0) * (x[0] * x[1]).ln();
    let f = hyper_pfm(&[], &[lambda], d.b_tilde(3) * x[0] * x[1], params)?;
    Ok(combine(log_pref, f))
}

/// Multisensor bivariate density with margins `γ(p₁, λ)` and `γ(p₂, λ₂)`, `λ₂ ≥ λ`:
/// `p₁₂^{-λ}p₂^{-(λ₂-λ)}/(Γ(λ)Γ(λ₂)) x₁^{λ-1}x₂^{λ₂-1} e^{…} Φ₃(λ₂-λ; λ₂; c(p₁₂/p₂)x₂, c x₁x₂)`.
pub fn pdf_multisensor(
    p: &AffinePolynomial,
    lambda: f64,
    lambda2: f64,
    x: &[f64],
    params: &SeriesParams,
) -> Result<f64> {
    require_dim(p, 2)?;
    require_shape("lambda", lambda)?;
    require_x(x, 2)?;
    if !(lambda2 >= lambda) {
        return Err(Error::InvalidParameter(format!("lambda2 = {lambda2} is below lambda = {lambda}")));
    }
    let d = require_id(p)?;
    if !in_support(x) {
        return Ok(0.0);
    }
    let (p1, p2, p12) = (p.coeff(1), p.coeff(2), p.coeff(3));
    let c = d.b_tilde(3);
    let log_pref = -lambda * p12.ln() - (lambda2 - lambda) * p2.ln() - ln_gamma(lambda) - ln_gamma(lambda2)
        + (lambda - 1.0) * x[0].ln()
        + (lambda2 - 1.0) * x[1].ln()
        - (p2 / p12) * x[0]
        - (p1 / p12) * x[1];
    let f = horn_phi3(lambda2 - lambda, lambda2, c * (p12 / p2) * x[1], c * x[0] * x[1], params)?;
    Ok(combine(log_pref, f))
}

/// Bivariate mfgd density with `Λ = (λ, λ₁, λ₂)`, `λ_i ≥ λ`:
/// `p₁₂^{-λ}p₁^{-(λ₁-λ)}p₂^{-(λ₂-λ)}/(Γ(λ₁)Γ(λ₂)) x₁^{λ₁-1}x₂^{λ₂-1} e^{…}
/// F_I(λ₁-λ, λ₂-λ, λ; c(p₁₂/p₁)x₁, c(p₁₂/p₂)x₂, c x₁x₂)` with `c = b̃₁₂`.
pub fn pdf_bivariate_mfgd(
    p: &AffinePolynomial,
    big_lambda: [f64; 3],
    x: &[f64],
    params: &SeriesParams,
) -> Result<f64> {
    require_dim(p, 2)?;
    let [lambda, l1, l2] = big_lambda;
    require_shape("lambda", lambda)?;
    require_x(x, 2)?;
    if !(l1 >= lambda && l2 >= lambda) {
        return Err(Error::InvalidParameter(format!("marginal shapes ({l1}, {l2}) must be at least lambda = {lambda}")));
    }
    let d = require_id(p)?;
    if !in_support(x) {
        return Ok(0.0);
    }
    let (p1, p2, p12) = (p.coeff(1), p.coeff(2), p.coeff(3));
    let c = d.b_tilde(3);
    let log_pref = -lambda * p12.ln() - (l1 - lambda) * p1.ln() - (l2 - lambda) * p2.ln() - ln_gamma(l1) - ln_gamma(l2)
        + (l1 - 1.0) * x[0].ln()
        + (l2 - 1.0) * x[1].ln()
        - (p2 / p12) * x[0]
        - (p1 / p12) * x[1];
    let z = [c * (p12 / p1) * x[0], c * (p12 / p2) * x[1], c * x[0] * x[1]];
    let f = lauricella_fi(l1 - lambda, l2 - lambda, lambda, z, params)?;
    Ok(combine(log_pref, f))
}

/// Trivariate gamma density:
/// `p₁₂₃^{-λ}/Γ(λ)³ exp(Σ p̃_i x_i)(x₁x₂x₃)^{λ-1} ₁F₃(λ; b̃₁₂x₁x₂, b̃₁₃x₁x₃, b̃₂₃x₂x₃, b̃₁₂₃x₁x₂x₃)`.
///
/// The `₁F₃` factor is evaluated as
/// `F_II(λ, λ; b̃₁₃x₁x₃·b̃₂₃x₂x₃, b̃₁₂₃x₁x₂x₃, b̃₁₂x₁x₂, b̃₁₃x₁x₃ + b̃₂₃x₂x₃)`,
/// an exact rearrangement that sums far fewer terms.
pub fn pdf_tgd(p: &AffinePolynomial, lambda: f64, x: &[f64], params: &SeriesParams) -> Result<f64> {
    require_dim(p, 3)?;
    require_shape("lambda", lambda)?;
    require_x(x, 3)?;
    let d = require_id(p)?;
    if !in_support(x) {
        return Ok(0.0);
    }
    let z = tgd_arguments(&d, x);
    let f = lauricella_fii(lambda, lambda, [z[1] * z[2], z[3], z[0], z[1] + z[2]], params)?;
    Ok(combine(tgd_log_prefactor(p, &d, lambda, x), f))
}

/// The `₁F₃` arguments `(b̃₁₂x₁x₂, b̃₁₃x₁x₃, b̃₂₃x₂x₃, b̃₁₂₃x₁x₂x₃)`.
pub(crate) fn tgd_arguments(d: &DualTables, x: &[f64]) -> [f64; 4] {
    [
        d.b_tilde(0b011) * x[0] * x[1],
        d.b_tilde(0b101) * x[0] * x[2],
        d.b_tilde(0b110) * x[1] * x[2],
        d.b_tilde(0b111) * x[0] * x[1] * x[2],
    ]
}

pub(crate) fn tgd_log_prefactor(p: &AffinePolynomial, d: &DualTables, lambda: f64, x: &[f64]) -> f64 {
    let lin: f64 = (0..3).map(|i| d.theta_p[i] * x[i]).sum();
    -lambda * p.top().ln() - 3.0 * ln_gamma(lambda) + lin + (lambda - 1.0) * x.iter().map(|v| v.ln()).sum::<f64>()
}

/// Density of the exchangeable mgd with `P_n(θ) = -q/p + (1/p)Π(1 + pθ_i)`:
/// `p^{-(n-1)λ}/Γ(λ)^n e^{-Σx_i/p}(Πx_i)^{λ-1} F_{n-1}(λ,…,λ; q p^{-n} Πx_i)`.
pub fn pdf_exchangeable(n: usize, p: f64, lambda: f64, x: &[f64], params: &SeriesParams) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("exchangeable parameter p = {p} outside (0,1)")));
    }
    if n < 2 {
        return Err(Error::DimensionOutOfRange { n, max: crate::combinat::MAX_DIM });
    }
    require_shape("lambda", lambda)?;
    require_x(x, n)?;
    if !in_support(x) {
        return Ok(0.0);
    }
    let nf = n as f64;
    let log_prod: f64 = x.iter().map(|v| v.ln()).sum();
    let log_pref = -(nf - 1.0) * lambda * p.ln() - nf * ln_gamma(lambda) - x.iter().sum::<f64>() / p
        + (lambda - 1.0) * log_prod;
    let z = (1.0 - p) * (log_prod - nf * p.ln()).exp();
    let f = hyper_pfm(&[], &vec![lambda; n - 1], z, params)?;
    Ok(combine(log_pref, f))
}

/// Density of a general mgd through the `c_α` expansion:
/// `(p_[n]^{-λ}/Γ(λ)^n) exp(⟨θ_P, x⟩) x^{(λ-1)1} Σ_α c_α(R)/(λ)_α x^α`.
pub fn pdf_general(spec: &MgdSpec, x: &[f64], params: &SeriesParams) -> Result<f64> {
    GeneralDensity::new(spec, *params)?.density(x)
}

/// Cached `c_α` expansion for repeated density evaluation.
///
/// The expansion degree doubles on demand until the shell sum converges or
/// `params.max_total_degree` is reached.
#[derive(Clone, Debug)]
pub struct GeneralDensity {
    n: usize,
    lambda: f64,
    log_norm: f64,
    theta_p: Vec<f64>,
    r: Vec<f64>,
    window: usize,
    params: SeriesParams,
    expansion: CoefficientExpansion,
    cell_degree: Vec<u16>,
    log_poch: Vec<f64>,
}

const INITIAL_DEGREE: usize = 24;

impl GeneralDensity {
    pub fn new(spec: &MgdSpec, params: SeriesParams) -> Result<Self> {
        params.validate()?;
        let p = &spec.p;
        let lambda = spec.lambda;
        let d = require_id(p)?;
        let n = p.n();
        let window = (0..d.r.len()).filter(|&t| d.r[t] != 0.0).map(|t| t.count_ones() as usize).max().unwrap_or(2).max(2);
        let degree = INITIAL_DEGREE.min(params.max_total_degree);
        let log_norm = -lambda * p.top().ln() - n as f64 * ln_gamma(lambda);
        let mut g = GeneralDensity {
            n,
            lambda,
            log_norm,
            theta_p: d.theta_p.clone(),
            r: d.r.clone(),
            window,
            params,
            expansion: c_alpha_expansion(n, &d.r, lambda, 0)?,
            cell_degree: Vec::new(),
            log_poch: Vec::new(),
        };
        g.rebuild(degree)?;
        Ok(g)
    }

    fn rebuild(&mut self, degree: usize) -> Result<()> {
        self.expansion = c_alpha_expansion(self.n, &self.r, self.lambda, degree)?;
        let side = degree + 1;
        let cells = self.expansion.raw().0.len();
        self.cell_degree = (0..cells)
            .map(|mut idx| {
                let mut t = 0;
                for _ in 0..self.n {
                    t += idx % side;
                    idx /= side;
                }
                t as u16
            })
            .collect();
        let mut lp = vec![0.0; side];
        for k in 1..side {
            lp[k] = lp[k - 1] + (self.lambda + (k - 1) as f64).ln();
        }
        self.log_poch = lp;
        Ok(())
    }

    /// Current degree bound of the cached expansion.
    pub fn degree(&self) -> usize {
        self.expansion.degree()
    }

    pub fn expansion(&self) -> &CoefficientExpansion {
        &self.expansion
    }

    /// Density at `x`; grows the cached expansion when the series needs it.
    pub fn density_mut(&mut self, x: &[f64]) -> Result<f64> {
        require_x(x, self.n)?;
        if !in_support(x) {
            return Ok(0.0);
        }
        loop {
            match self.series(x) {
                Some(s) => return Ok(combine(self.prefactor(x), s)),
                None => {
                    let deg = self.degree();
                    if deg >= self.params.max_total_degree {
                        return Err(Error::SeriesBudget { terms: self.expansion.raw().0.len(), ratio: f64::NAN });
                    }
                    self.rebuild((2 * deg).min(self.params.max_total_degree))?;
                }
            }
        }
    }

    /// Density at `x` without growing the cache; fails if the cached degree is insufficient.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        require_x(x, self.n)?;
        if !in_support(x) {
            return Ok(0.0);
        }
        if let Some(s) = self.series(x) {
            return Ok(combine(self.prefactor(x), s));
        }
        let mut grown = self.clone();
        grown.density_mut(x)
    }

    fn prefactor(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.theta_p.iter().zip(x).map(|(t, v)| t * v).sum();
        self.log_norm + lin + (self.lambda - 1.0) * x.iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Shell-ordered sum, or `None` if it has not converged within the cached degree.
    fn series(&self, x: &[f64]) -> Option<f64> {
        let deg = self.degree();
        let side = deg + 1;
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let (coef, _) = self.expansion.raw();
        let mut shells = vec![CompensatedSum::new(); deg + 1];
        let mut digits = vec![0usize; self.n];
        for (idx, &c) in coef.iter().enumerate() {
            if idx > 0 {
                let mut i = 0;
                while digits[i] + 1 == side {
                    digits[i] = 0;
                    i += 1;
                }
                digits[i] += 1;
            }
            if c == 0.0 {
                continue;
            }
            let l: f64 = digits.iter().zip(&lx).map(|(&a, &lxi)| a as f64 * lxi - self.log_poch[a]).sum();
            shells[self.cell_degree[idx] as usize].add(c * l.exp());
        }
        let mut acc = CompensatedSum::new();
        let mut quiet = 0;
        for (d, s) in shells.iter().enumerate() {
            let s = s.value();
            acc.add(s);
            if d > 0 && s.abs() <= self.params.tol * acc.value().abs() {
                quiet += 1;
                if quiet >= self.window {
                    return Some(acc.value());
                }
            } else {
                quiet = 0;
            }
        }
        None
    }
}

/// Regularized lower incomplete gamma `P(shape, x)`, the `γ(1, shape)` CDF at `x`.
pub fn reg_lower_incomplete_gamma(shape: f64, x: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("incomplete gamma needs shape > 0 and x >= 0, got ({shape}, {x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_lr(shape, x).clamp(0.0, 1.0))
}
