//! Coefficients `c_{α,λ}(R)` of `[1 - R(z)]^{-λ} = Σ_α c_{α,λ}(R) z^α`.

use super::series::pochhammer;
use crate::combinat::mask_elements;
use crate::{Error, Result};

/// Hard cap on the dense table size `(degree + 1)^n`.
pub const MAX_EXPANSION_CELLS: usize = 40_000_000;

/// Dense table of `c_{α,λ}(R)` for `|α| ≤ degree`.
#[derive(Clone, Debug)]
pub struct CoefficientExpansion {
    n: usize,
    degree: usize,
    strides: Vec<usize>,
    coef: Vec<f64>,
}

impl CoefficientExpansion {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest `|α|` the table is valid to.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `c_α`, or 0 beyond the degree bound.
    pub fn get(&self, alpha: &[u32]) -> f64 {
        assert_eq!(alpha.len(), self.n);
        if alpha.iter().map(|&a| a as usize).sum::<usize>() > self.degree {
            return 0.0;
        }
        let idx: usize = alpha.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum();
        self.coef[idx]
    }

    /// All `(α, c_α)` with `c_α ≠ 0`.
    pub fn nonzero(&self) -> Vec<(Vec<u32>, f64)> {
        let mut out = Vec::new();
        for (idx, &c) in self.coef.iter().enumerate() {
            if c != 0.0 {
                out.push((self.decode(idx), c));
            }
        }
        out
    }

    fn decode(&self, mut idx: usize) -> Vec<u32> {
        let side = self.degree + 1;
        (0..self.n)
            .map(|_| {
                let a = idx % side;
                idx /= side;
                a as u32
            })
            .collect()
    }

    pub(crate) fn raw(&self) -> (&[f64], &[usize]) {
        (&self.coef, &self.strides)
    }
}

/// Expands `Σ_k (λ)_k R(z)^k / k!` by monomial up to total degree `degree`.
///
/// `r` is a mask-indexed table of `r_T` over `n` variables; entries with
/// `|T| < 2` are ignored.
pub fn c_alpha_expansion(n: usize, r: &[f64], lambda: f64, degree: usize) -> Result<CoefficientExpansion> {
    if r.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, got: r.len() });
    }
    let side = degree + 1;
    let cells = side
        .checked_pow(n as u32)
        .filter(|&c| c <= MAX_EXPANSION_CELLS)
        .ok_or(Error::SeriesBudget { terms: usize::MAX, ratio: f64::NAN })?;
    let strides: Vec<usize> = (0..n).map(|i| side.pow(i as u32)).collect();
    // total degree of each cell
    let mut total = vec![0u16; cells];
    for idx in 1..cells {
        // each wrapped digit drops by `degree`, the carried digit gains 1
        let prev = idx - 1;
        let mut t = total[prev] as i64 + 1;
        let mut k = idx;
        while k % side == 0 {
            t -= degree as i64;
            k /= side;
        }
        total[idx] = t as u16;
    }
    let monomials: Vec<(usize, usize, f64)> = (0..r.len() as u32)
        .filter(|&t| t.count_ones() >= 2 && r[t as usize] != 0.0)
        .map(|t| {
            let off: usize = mask_elements(t).map(|i| strides[i]).sum();
            (off, t.count_ones() as usize, r[t as usize])
        })
        .collect();
    let mut coef = vec![0.0; cells];
    coef[0] = 1.0;
    let mut power = vec![0.0; cells];
    power[0] = 1.0;
    let mut weight = 1.0;
    for k in 1..=degree / 2 {
        let mut next = vec![0.0; cells];
        let mut any = false;
        for idx in 0..cells {
            let v = power[idx];
            if v == 0.0 {
                continue;
            }
            for &(off, deg, rt) in &monomials {
                if total[idx] as usize + deg <= degree {
                    next[idx + off] += v * rt;
                    any = true;
                }
            }
        }
        if !any {
            break;
        }
        weight *= (lambda + (k - 1) as f64) / k as f64;
        for idx in 0..cells {
            coef[idx] += weight * next[idx];
        }
        power = next;
    }
    Ok(CoefficientExpansion { n, degree, strides, coef })
}

fn fact(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Closed form for `n = 2`: `c_{(l,l)} = (λ)_l b̃₁₂^l / l!`, zero off the diagonal.
pub fn c_alpha_r2_closed(b12: f64, lambda: f64, alpha: [u32; 2]) -> f64 {
    if alpha[0] != alpha[1] {
        return 0.0;
    }
    let l = alpha[0];
    pochhammer(lambda, l as usize) * b12.powi(l as i32) / fact(l)
}

/// Closed form for `n = 3` with `b = (b̃₁₂, b̃₁₃, b̃₂₃, b̃₁₂₃)`:
/// `Σ_{‖α‖∞ ≤ k ≤ |α|/2} (λ)_k b̃₁₂^{k-α₃} b̃₁₃^{k-α₂} b̃₂₃^{k-α₁} b̃₁₂₃^{|α|-2k}
/// / [(k-α₃)!(k-α₂)!(k-α₁)!(|α|-2k)!]`, zero when `‖α‖∞ > |α|/2`.
pub fn c_alpha_r3_closed(b: [f64; 4], lambda: f64, alpha: [u32; 3]) -> f64 {
    let tot = alpha.iter().sum::<u32>();
    let maxa = *alpha.iter().max().unwrap();
    let mut s = 0.0;
    let mut k = maxa;
    while 2 * k <= tot {
        let e = [k - alpha[2], k - alpha[1], k - alpha[0], tot - 2 * k];
        let mut t = pochhammer(lambda, k as usize);
        for i in 0..4 {
            t *= b[i].powi(e[i] as i32) / fact(e[i]);
        }
        s += t;
        k += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r3(b: [f64; 4]) -> Vec<f64> {
        // masks 3 = {1,2}, 5 = {1,3}, 6 = {2,3}, 7 = {1,2,3}
        let mut r = vec![0.0; 8];
        r[3] = b[0];
        r[5] = b[1];
        r[6] = b[2];
        r[7] = b[3];
        r
    }

    #[test]
    fn n2_matches_closed_form() {
        let r = vec![0.0, 0.0, 0.0, 8.0];
        let e = c_alpha_expansion(2, &r, 2.0, 20).unwrap();
        for a in 0..=10u32 {
            for b in 0..=(20 - a) {
                let want = c_alpha_r2_closed(8.0, 2.0, [a, b]);
                let got = e.get(&[a, b]);
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "({a},{b})");
            }
        }
    }

    #[test]
    fn n3_small_examples() {
        let b = [0.625, 1.875, 1.1875, 1.5625];
        let lam = 2.0;
        let e = c_alpha_expansion(3, &r3(b), lam, 8).unwrap();
        assert_eq!(e.get(&[0, 0, 0]), 1.0);
        assert_eq!(e.get(&[1, 0, 0]), 0.0);
        assert!((e.get(&[1, 1, 0]) - lam * b[0]).abs() < 1e-15);
        assert_eq!(c_alpha_r3_closed(b, lam, [1, 0, 0]), 0.0);
        assert!((c_alpha_r3_closed(b, lam, [1, 1, 0]) - lam * b[0]).abs() < 1e-15);
    }

    #[test]
    fn n3_matches_closed_form_to_degree_8() {
        let tables = [[0.625, 1.875, 1.1875, 1.5625], [0.3, 0.0, 2.2, 0.7], [1.1, 0.4, 0.9, 0.0]];
        for b in tables {
            for lam in [0.7, 2.0, 3.5] {
                let e = c_alpha_expansion(3, &r3(b), lam, 8).unwrap();
                for a1 in 0..=8u32 {
                    for a2 in 0..=(8 - a1) {
                        for a3 in 0..=(8 - a1 - a2) {
                            let want = c_alpha_r3_closed(b, lam, [a1, a2, a3]);
                            let got = e.get(&[a1, a2, a3]);
                            assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{b:?} {lam} {:?}", [a1, a2, a3]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sparsity_patterns() {
        // b̃123 = 0: only even |α|
        let e = c_alpha_expansion(3, &r3([0.5, 0.7, 0.2, 0.0]), 1.5, 10).unwrap();
        for (a, _) in e.nonzero() {
            assert_eq!(a.iter().sum::<u32>() % 2, 0, "{a:?}");
        }
        // all pairs zero: only α = k·(1,1,1)
        let e = c_alpha_expansion(3, &r3([0.0, 0.0, 0.0, 0.9]), 1.5, 12).unwrap();
        let nz = e.nonzero();
        assert_eq!(nz.len(), 5);
        for (a, c) in nz {
            assert!(a[0] == a[1] && a[1] == a[2]);
            let k = a[0];
            let want = pochhammer(1.5, k as usize) * 0.9f64.powi(k as i32) / fact(k);
            assert!((c - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn oversize_is_rejected() {
        let r = vec![0.0; 1 << 6];
        assert!(c_alpha_expansion(6, &r, 1.0, 100).is_err());
    }
}
