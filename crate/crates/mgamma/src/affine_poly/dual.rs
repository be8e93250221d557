//! Dual coefficients `p̃_T`, partition sums `b_S`/`b̃_S`, Taylor remainders `r_T`,
//! and the infinite-divisibility test built on them.

use super::AffinePolynomial;
use crate::combinat::{for_each_partition, mask_elements, mask_label};
use crate::{Error, Result};
use serde::Serialize;

/// Largest dimension for which dual tables are computed. The partition sums
/// over all subsets cost `Bell(n + 1)` products.
pub const MAX_DUAL_DIM: usize = 12;

/// Width of the band `[-BORDERLINE_BAND, 0)` in which a negative `b̃_S` is flagged borderline.
pub const BORDERLINE_BAND: f64 = 1e-12;

const FACT: [f64; 17] = {
    let mut f = [1.0; 17];
    let mut i = 1;
    while i < 17 {
        f[i] = f[i - 1] * i as f64;
        i += 1;
    }
    f
};

/// `Σ_k (k-1)! Σ_{π ∈ Π_S^k} Π_{B ∈ π} c_B` over a mask-indexed table.
///
/// Results within rounding noise of zero (relative to the summed magnitudes)
/// are returned as exactly 0, so structural zeros such as the non-adjacent
/// pairs of a Markov chain stay on the boundary instead of turning slightly negative.
pub(crate) fn partition_sum(table: &[f64], s: u32) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut mag = 0.0f64;
    for_each_partition(s, |blocks| {
        let mut t = FACT[blocks.len() - 1];
        for &b in blocks {
            t *= table[b as usize];
        }
        mag += t.abs();
        // Neumaier
        let y = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - y) + t } else { (t - y) + sum };
        sum = y;
    });
    let total = sum + comp;
    if total.abs() <= 32.0 * f64::EPSILON * mag {
        0.0
    } else {
        total
    }
}

/// Derived coefficient tables of a polynomial, all indexed by subset mask.
#[derive(Clone, Debug, PartialEq)]
pub struct DualTables {
    pub n: usize,
    /// `p̃_T = -p_{T̄} / p_{[n]}`; `p̃_∅ = -1`.
    pub p_tilde: Vec<f64>,
    /// `b_S(P)`; entry 0 unused (0).
    pub b: Vec<f64>,
    /// `b̃_S = b_S(P̃)`; entry 0 unused (0).
    pub b_tilde: Vec<f64>,
    /// `r_T` for `|T| ≥ 2`; other entries 0.
    pub r: Vec<f64>,
    /// `θ_P = (p̃_1, …, p̃_n)`.
    pub theta_p: Vec<f64>,
}

impl DualTables {
    pub fn new(p: &AffinePolynomial) -> Result<Self> {
        let n = p.n();
        if n > MAX_DUAL_DIM {
            return Err(Error::DimensionOutOfRange { n, max: MAX_DUAL_DIM });
        }
        let full = p.full_mask();
        let top = p.top();
        if top == 0.0 {
            return Err(Error::ZeroCoefficient { subset: mask_label(full) });
        }
        let size = 1usize << n;
        let p_tilde: Vec<f64> = (0..size as u32).map(|t| -p.coeff(full ^ t) / top).collect();
        let mut b = vec![0.0; size];
        let mut b_tilde = vec![0.0; size];
        for s in 1..size as u32 {
            b[s as usize] = partition_sum(p.coeffs(), s);
            b_tilde[s as usize] = partition_sum(&p_tilde, s);
        }
        let theta_p: Vec<f64> = (0..n).map(|i| p_tilde[1 << i]).collect();
        let mut tables = DualTables { n, p_tilde, b, b_tilde, r: vec![0.0; size], theta_p };
        for t in 1..size as u32 {
            let k = t.count_ones();
            if k >= 2 {
                tables.r[t as usize] = if k <= 5 {
                    tables.r_closed_form(t)
                } else {
                    r_derivative(p, &tables.theta_p, t)
                };
            }
        }
        Ok(tables)
    }

    pub fn p_tilde(&self, mask: u32) -> f64 {
        self.p_tilde[mask as usize]
    }

    pub fn b(&self, mask: u32) -> f64 {
        self.b[mask as usize]
    }

    pub fn b_tilde(&self, mask: u32) -> f64 {
        self.b_tilde[mask as usize]
    }

    pub fn r(&self, mask: u32) -> f64 {
        self.r[mask as usize]
    }

    /// `r_T` from `b̃` for `2 ≤ |T| ≤ 5`.
    fn r_closed_form(&self, t: u32) -> f64 {
        let k = t.count_ones();
        let bt = |m: u32| self.b_tilde[m as usize];
        match k {
            2 | 3 => bt(t),
            4 | 5 => {
                // 2+2 splits for |T|=4, 3+2 splits for |T|=5
                let low = 1u32 << t.trailing_zeros();
                let mut corr = 0.0;
                let mut u = (t - 1) & t;
                while u != 0 {
                    let v = t ^ u;
                    let ok = if k == 4 {
                        u.count_ones() == 2 && u & low != 0
                    } else {
                        u.count_ones() == 3
                    };
                    if ok {
                        corr += bt(u) * bt(v);
                    }
                    u = (u - 1) & t;
                }
                bt(t) - corr
            }
            _ => unreachable!("closed forms cover 2 <= |T| <= 5"),
        }
    }
}

/// `r_T = -(1/p_{[n]}) (∂/∂θ)^{T̄} P (θ_P)`.
pub fn r_derivative(p: &AffinePolynomial, theta_p: &[f64], t: u32) -> f64 {
    let tbar = p.full_mask() ^ t;
    let mut acc = 0.0;
    // monomials p_{T̄ ∪ U} θ_P^U for U ⊆ T
    let mut u = t;
    loop {
        let mono: f64 = mask_elements(u).map(|i| theta_p[i]).product();
        acc += p.coeff(tbar | u) * mono;
        if u == 0 {
            break;
        }
        u = (u - 1) & t;
    }
    -acc / p.top()
}

/// One violated condition of the infinite-divisibility criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdFailure {
    /// Comma-joined 1-based subset label.
    pub subset: String,
    pub value: f64,
    /// `"< 0"` for `p̃_i`, `">= 0"` for `b̃_S`.
    pub required: String,
    /// Value lies in `[-BORDERLINE_BAND, 0)`.
    pub borderline: bool,
}

/// Options for [`IdReport::check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdOptions {
    /// `b̃_S ≥ -tol` is accepted. Default 0.
    pub tol: f64,
}

impl Default for IdOptions {
    fn default() -> Self {
        IdOptions { tol: 0.0 }
    }
}

/// Verdict of the infinite-divisibility criterion `p̃_i < 0 ∀i`, `b̃_S ≥ 0 ∀|S| ≥ 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdReport {
    pub is_id: bool,
    pub failing_conditions: Vec<IdFailure>,
}

impl IdReport {
    /// Requires `p_i > 0` and `p_{[n]} > 0`; violations are returned as errors.
    pub fn check(p: &AffinePolynomial, opts: IdOptions) -> Result<IdReport> {
        let tables = DualTables::new(p)?;
        Self::from_tables(p, &tables, opts)
    }

    pub fn from_tables(p: &AffinePolynomial, d: &DualTables, opts: IdOptions) -> Result<IdReport> {
        for i in 0..p.n() {
            if !(p.scale(i) > 0.0) {
                return Err(Error::Hypothesis(format!("p_{} = {} must be positive", i + 1, p.scale(i))));
            }
        }
        if !(p.top() > 0.0) {
            return Err(Error::Hypothesis(format!(
                "p_{{{}}} = {} must be positive",
                mask_label(p.full_mask()),
                p.top()
            )));
        }
        let mut failing = Vec::new();
        for i in 0..p.n() {
            let v = d.p_tilde(1 << i);
            if !(v < 0.0) {
                failing.push(IdFailure {
                    subset: mask_label(1 << i),
                    value: v,
                    required: "< 0".into(),
                    borderline: false,
                });
            }
        }
        for s in 1..=p.full_mask() {
            if s.count_ones() < 2 {
                continue;
            }
            let v = d.b_tilde(s);
            if !(v >= -opts.tol) {
                failing.push(IdFailure {
                    subset: mask_label(s),
                    value: v,
                    required: ">= 0".into(),
                    borderline: v < 0.0 && v >= -BORDERLINE_BAND,
                });
            }
        }
        Ok(IdReport { is_id: failing.is_empty(), failing_conditions: failing })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::submasks;

    fn poly(n: usize, terms: &[(&[usize], f64)]) -> AffinePolynomial {
        AffinePolynomial::from_terms(n, terms).unwrap()
    }

    /// Square-free coefficients of `-log(1 - Σ_{T≠∅} c_T θ^T)`, via subset convolution.
    /// Independent of the partition enumeration.
    fn log_series_oracle(c: &[f64], n: usize) -> Vec<f64> {
        let size = 1usize << n;
        let mut acc = vec![0.0; size];
        let mut pow = vec![0.0; size];
        pow[0] = 1.0;
        for k in 1..=n {
            let mut next = vec![0.0; size];
            for s in 1..size as u32 {
                for u in submasks(s) {
                    if u != 0 {
                        next[s as usize] += pow[(s ^ u) as usize] * c[u as usize];
                    }
                }
            }
            pow = next;
            for s in 0..size {
                acc[s] += pow[s] / k as f64;
            }
        }
        acc
    }

    #[test]
    fn p2_duals() {
        let p = poly(2, &[(&[1], 3.0), (&[2], 3.0), (&[1, 2], 1.0)]);
        let d = p.dual_tables().unwrap();
        assert_eq!(d.p_tilde(1), -3.0);
        assert_eq!(d.p_tilde(2), -3.0);
        assert_eq!(d.p_tilde(0), -1.0);
        assert!((d.b_tilde(3) - 8.0).abs() < 1e-13);
        assert_eq!(d.theta_p, vec![-3.0, -3.0]);
        assert!(p.check_id().unwrap().is_id);
    }

    #[test]
    fn p3_duals() {
        let p = poly(
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
        );
        let d = p.dual_tables().unwrap();
        assert!((d.b_tilde(0b011) - 0.625).abs() < 1e-12);
        assert!((d.b_tilde(0b101) - 1.875).abs() < 1e-12);
        assert!((d.b_tilde(0b110) - 1.1875).abs() < 1e-12);
        assert!((d.b_tilde(0b111) - 1.5625).abs() < 1e-12);
        assert!(p.check_id().unwrap().is_id);
    }

    #[test]
    fn non_id_witness() {
        let p = poly(2, &[(&[1], 1.0), (&[2], 1.0), (&[1, 2], 2.0)]);
        let r = p.check_id().unwrap();
        assert!(!r.is_id);
        assert_eq!(r.failing_conditions.len(), 1);
        let f = &r.failing_conditions[0];
        assert_eq!(f.subset, "1,2");
        assert!((f.value + 0.25).abs() < 1e-15);
        assert!(!f.borderline);
    }

    #[test]
    fn hypotheses_are_errors() {
        let p = poly(2, &[(&[1], -1.0), (&[2], 1.0), (&[1, 2], 0.5)]);
        assert!(matches!(p.check_id(), Err(Error::Hypothesis(_))));
        let p = poly(2, &[(&[1], 1.0), (&[2], 1.0)]);
        assert!(p.dual_tables().is_err());
    }

    #[test]
    fn boundary_zero_counts_as_id() {
        // p12 = p1 p2 gives b̃12 = 0 exactly
        let p = poly(2, &[(&[1], 2.0), (&[2], 3.0), (&[1, 2], 6.0)]);
        let d = p.dual_tables().unwrap();
        assert_eq!(d.b_tilde(3), 0.0);
        assert!(p.check_id().unwrap().is_id);
    }

    #[test]
    fn borderline_flag_and_tolerance() {
        // b̃12 = (p1 p2 - p12)/p12² ≈ -1e-13
        let p12 = 1.0 + 1e-13;
        let p = poly(2, &[(&[1], 1.0), (&[2], 1.0), (&[1, 2], p12)]);
        let r = p.check_id().unwrap();
        assert!(!r.is_id);
        assert!(r.failing_conditions[0].borderline);
        let loose = IdReport::check(&p, IdOptions { tol: 1e-12 }).unwrap();
        assert!(loose.is_id);
    }

    #[test]
    fn symmetric_p4_by_cardinality() {
        let s = [4.75, 3.5, 2.0, 1.0];
        let coeff: Vec<f64> = (0..16u32)
            .map(|m| if m == 0 { 1.0 } else { s[m.count_ones() as usize - 1] })
            .collect();
        let p = AffinePolynomial::from_coeffs(4, coeff).unwrap();
        let d = p.dual_tables().unwrap();
        let want = [-2.0, 0.5, 0.25, 1.75];
        for m in 1..16u32 {
            assert!((d.b_tilde(m) - want[m.count_ones() as usize - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_sum_matches_log_series() {
        let p = poly(
            4,
            &[
                (&[1], 1.3),
                (&[2], 0.7),
                (&[3], 2.1),
                (&[4], 0.9),
                (&[1, 2], 0.4),
                (&[1, 3], 1.1),
                (&[2, 4], 0.3),
                (&[1, 2, 3], 0.2),
                (&[2, 3, 4], 0.6),
                (&[1, 2, 3, 4], 0.15),
            ],
        );
        let d = p.dual_tables().unwrap();
        let mut neg = d.p_tilde.clone();
        neg[0] = 0.0;
        let oracle_tilde = log_series_oracle(&neg, 4);
        let oracle = log_series_oracle(p.coeffs(), 4);
        for s in 1..16 {
            assert!((d.b_tilde[s] - oracle_tilde[s]).abs() < 1e-12 * oracle_tilde[s].abs().max(1.0));
            assert!((d.b[s] - oracle[s]).abs() < 1e-12 * oracle[s].abs().max(1.0));
        }
    }

    #[test]
    fn singleton_b_tilde_is_p_tilde() {
        let p = poly(3, &[(&[1], 1.0), (&[2], 2.0), (&[3], 3.0), (&[1, 2, 3], 0.5)]);
        let d = p.dual_tables().unwrap();
        for i in 0..3 {
            assert_eq!(d.b_tilde(1 << i), d.p_tilde(1 << i));
        }
    }

    #[test]
    fn r_closed_forms_match_derivative_n5() {
        let coeff: Vec<f64> = (0..32u32)
            .map(|m| if m == 0 { 1.0 } else { 0.3 + 0.05 * (m as f64 * 7.3).sin().abs() * m.count_ones() as f64 })
            .collect();
        let p = AffinePolynomial::from_coeffs(5, coeff).unwrap();
        let d = p.dual_tables().unwrap();
        for t in 1..32u32 {
            if t.count_ones() >= 2 {
                let rd = r_derivative(&p, &d.theta_p, t);
                assert!((d.r(t) - rd).abs() < 1e-10 * rd.abs().max(1.0), "T={t:#b}");
            }
        }
    }
}
