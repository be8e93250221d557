//! Markov chain sampler for Markovian polynomials.

use super::bivariate::check_lambda;
use super::{gamma_unchecked, poisson_unchecked, RngStream, RowSampler};
use crate::{Error, Result};

/// Chain with lag-one correlations `ρ_i ∈ [0, 1)`:
/// `X₁ ~ γ(1, λ)`, `V_i ~ P(ρ_i/(1-ρ_i) X_i)`, `X_{i+1} ~ γ(1-ρ_i, λ+V_i)`.
/// Optional per-axis scales multiply the unit-scale chain.
#[derive(Clone, Debug)]
pub struct MarkovSampler {
    lambda: f64,
    rates: Vec<f64>,
    steps: Vec<f64>,
    scales: Vec<f64>,
}

impl MarkovSampler {
    pub fn new(rho: &[f64], lambda: f64, scales: Option<&[f64]>) -> Result<Self> {
        check_lambda(lambda)?;
        if rho.is_empty() {
            return Err(Error::InvalidParameter("Markov chain needs at least one correlation".into()));
        }
        if let Some(r) = rho.iter().find(|&&r| !(0.0..1.0).contains(&r)) {
            return Err(Error::InvalidParameter(format!("lag-one correlation {r} outside [0, 1)")));
        }
        let n = rho.len() + 1;
        let scales = match scales {
            Some(s) if s.len() != n => return Err(Error::DimensionMismatch { expected: n, got: s.len() }),
            Some(s) => {
                if let Some(bad) = s.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidParameter(format!("scale {bad} must be positive")));
                }
                s.to_vec()
            }
            None => vec![1.0; n],
        };
        Ok(MarkovSampler {
            lambda,
            rates: rho.iter().map(|r| r / (1.0 - r)).collect(),
            steps: rho.iter().map(|r| 1.0 - r).collect(),
            scales,
        })
    }
}

impl RowSampler for MarkovSampler {
    fn dim(&self) -> usize {
        self.scales.len()
    }

    fn algorithm(&self) -> &'static str {
        "markov"
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        let mut x = gamma_unchecked(self.lambda, 1.0, rng);
        out[0] = x;
        for i in 0..self.rates.len() {
            let v = poisson_unchecked(self.rates[i] * x, rng);
            x = gamma_unchecked(self.lambda + v as f64, self.steps[i], rng);
            out[i + 1] = x;
        }
        for (o, s) in out.iter_mut().zip(&self.scales) {
            *o *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::sample_markov;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn chain_correlations() {
        let rho = [0.81, 0.64, 0.49, 0.36];
        let b = sample_markov(&rho, 2.0, 200_000, None, 9).unwrap();
        let c: Vec<Vec<f64>> = (0..5).map(|j| b.column(j)).collect();
        for i in 0..4 {
            assert!((corr(&c[i], &c[i + 1]) - rho[i]).abs() < 0.01, "lag {i}");
        }
        assert!((corr(&c[0], &c[4]) - 0.09144576).abs() < 0.01);
        for col in &c {
            assert!((col.iter().sum::<f64>() / 2e5 - 2.0).abs() < 0.03);
        }
    }

    #[test]
    fn scales_and_validation() {
        let b = sample_markov(&[0.5], 1.5, 100_000, Some(&[2.0, 0.5]), 4).unwrap();
        assert!((b.column(0).iter().sum::<f64>() / 1e5 - 3.0).abs() < 0.05);
        assert!((b.column(1).iter().sum::<f64>() / 1e5 - 0.75).abs() < 0.02);
        assert!(MarkovSampler::new(&[1.0], 1.0, None).is_err());
        assert!(MarkovSampler::new(&[0.5], 1.0, Some(&[1.0])).is_err());
        assert!(MarkovSampler::new(&[], 1.0, None).is_err());
    }
}
