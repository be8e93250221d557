//! Markovian polynomials `P_n(θ) = det(I + D_θ R_{1/2})`.

use super::AffinePolynomial;
use crate::combinat::{mask_elements, MAX_DIM};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Square-root correlation matrix `R_{1/2}` of a chain with lag-one correlations `rho`.
///
/// `a_ii = 1`, `a_ij = Π_{l=i}^{j-1} √ρ_{l,l+1}` for `i < j`, symmetric. The
/// matrix has dimension `rho.len() + 1`.
pub fn markov_sqrt_matrix(rho: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(r) = rho.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::InvalidParameter(format!("chain correlation {r} outside (0,1)")));
    }
    let n = rho.len() + 1;
    if n < 2 || n > MAX_DIM {
        return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
    }
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
        let mut v = 1.0;
        for j in (i + 1)..n {
            v *= rho[j - 1].sqrt();
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    Ok(a)
}

/// Expands `det(I + D_θ A)` as `Σ_T det(A[T,T]) θ^T`, then optionally rescales
/// `p_T ← p_T Π_{i∈T} s_i` (the law of `(s_1 X_1, …, s_n X_n)`).
pub fn markov_polynomial(r_half: &[Vec<f64>], scales: Option<&[f64]>) -> Result<AffinePolynomial> {
    let n = r_half.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
    }
    for (i, row) in r_half.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        if (row[i] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("diagonal entry {} is {}, expected 1", i + 1, row[i])));
        }
        for j in 0..i {
            if (row[j] - r_half[j][i]).abs() > 1e-12 * row[j].abs().max(1.0) {
                return Err(Error::InvalidParameter(format!("matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    if let Some(s) = scales {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.len() });
        }
    }
    let mut coeff = vec![0.0; 1 << n];
    coeff[0] = 1.0;
    for t in 1..(1u32 << n) {
        let idx: Vec<usize> = mask_elements(t).collect();
        let k = idx.len();
        let m = DMatrix::from_fn(k, k, |r, c| r_half[idx[r]][idx[c]]);
        let mut v = m.determinant();
        if let Some(s) = scales {
            v *= idx.iter().map(|&i| s[i]).product::<f64>();
        }
        coeff[t as usize] = v;
    }
    AffinePolynomial::from_coeffs(n, coeff)
}

/// Lag-one correlations and per-axis scales of a Markovian polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    pub rho: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Recovers `(ρ, scales)` if `p` is a scaled Markovian polynomial.
///
/// `ρ_{i,i+1} = 1 - p_{i,i+1}/(p_i p_{i+1})`; the candidate is rebuilt and
/// compared coefficientwise (relative tolerance 1e-9).
pub fn markov_chain_of(p: &AffinePolynomial) -> Option<MarkovChain> {
    let n = p.n();
    if n < 2 {
        return None;
    }
    let scales: Vec<f64> = (0..n).map(|i| p.scale(i)).collect();
    if scales.iter().any(|&s| !(s > 0.0)) {
        return None;
    }
    let rho: Vec<f64> = (0..n - 1)
        .map(|i| 1.0 - p.coeff((1 << i) | (1 << (i + 1))) / (scales[i] * scales[i + 1]))
        .collect();
    let a = markov_sqrt_matrix(&rho).ok()?;
    let cand = markov_polynomial(&a, Some(&scales)).ok()?;
    let close = p
        .coeffs()
        .iter()
        .zip(cand.coeffs())
        .all(|(x, y)| (x - y).abs() <= 1e-9 * y.abs().max(1e-3));
    close.then_some(MarkovChain { rho, scales })
}
