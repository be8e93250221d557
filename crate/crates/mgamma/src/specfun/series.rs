//! Hypergeometric-type series summed by total-degree shells.

use crate::{Error, Result};

/// Truncation controls shared by every series evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesParams {
    /// Stop once consecutive shells each contribute less than `tol` times the running sum.
    pub tol: f64,
    /// Cap on the total degree of any summed term.
    pub max_total_degree: usize,
    /// Cap on the number of evaluated terms.
    pub max_terms: usize,
}

impl Default for SeriesParams {
    fn default() -> Self {
        SeriesParams { tol: 1e-15, max_total_degree: 2000, max_terms: 20_000_000 }
    }
}

impl SeriesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_total_degree == 0 || self.max_terms == 0 {
            return Err(Error::InvalidParameter(format!("bad series parameters {self:?}")));
        }
        Ok(())
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() { (self.sum - t) + x } else { (x - t) + self.sum };
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(a)_k` by the recurrence `(a)_0 = 1`, `(a)_{k+1} = (a + k)(a)_k`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// `(a)_k` stored as sign and log-magnitude, extended on demand.
pub(crate) struct LogPoch {
    a: f64,
    log: Vec<f64>,
    sign: Vec<f64>,
}

impl LogPoch {
    pub(crate) fn new(a: f64) -> Self {
        LogPoch { a, log: vec![0.0], sign: vec![1.0] }
    }

    /// `(sign, ln|(a)_k|)`; sign 0 when `(a)_k = 0`.
    #[inline]
    pub(crate) fn get(&mut self, k: usize) -> (f64, f64) {
        while self.log.len() <= k {
            let j = self.log.len() - 1;
            let f = self.a + j as f64;
            let (s, l) = (*self.sign.last().unwrap(), *self.log.last().unwrap());
            if f == 0.0 || s == 0.0 {
                self.sign.push(0.0);
                self.log.push(f64::NEG_INFINITY);
            } else {
                self.sign.push(s * f.signum());
                self.log.push(l + f.abs().ln());
            }
        }
        (self.sign[k], self.log[k])
    }
}

/// `z^k / k!` stored as sign and log-magnitude.
pub(crate) struct LogPow {
    z: f64,
    log: Vec<f64>,
}

impl LogPow {
    pub(crate) fn new(z: f64) -> Self {
        LogPow { z, log: vec![0.0] }
    }

    #[inline]
    pub(crate) fn get(&mut self, k: usize) -> (f64, f64) {
        if k == 0 {
            return (1.0, 0.0);
        }
        if self.z == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        while self.log.len() <= k {
            let j = self.log.len();
            let l = *self.log.last().unwrap() + self.z.abs().ln() - (j as f64).ln();
            self.log.push(l);
        }
        let s = if self.z < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        (s, self.log[k])
    }
}

/// Calls `f` with every `m ∈ ℕ^dim` of total `total`.
pub(crate) fn for_each_composition<F: FnMut(&[usize])>(dim: usize, total: usize, f: &mut F) {
    let mut cur = vec![0usize; dim];
    fn rec<F: FnMut(&[usize])>(pos: usize, left: usize, cur: &mut [usize], f: &mut F) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            f(cur);
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, f);
        }
    }
    if dim == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(0, total, &mut cur, f);
}

/// Sums `term(m)` over `m ∈ ℕ^dim` shell by shell in `|m|`.
///
/// Stops after `window` consecutive shells each below `tol · |sum|`, which
/// tolerates series whose nonzero terms skip some degrees.
pub(crate) fn shell_sum<F: FnMut(&[usize]) -> f64>(
    dim: usize,
    params: &SeriesParams,
    window: usize,
    mut term: F,
) -> Result<f64> {
    params.validate()?;
    let mut acc = CompensatedSum::new();
    let mut terms = 0usize;
    let mut quiet = 0usize;
    let mut last_ratio = f64::INFINITY;
    for d in 0..=params.max_total_degree {
        let mut shell = CompensatedSum::new();
        let mut count = 0usize;
        for_each_composition(dim, d, &mut |m| {
            shell.add(term(m));
            count += 1;
        });
        terms += count;
        let s = shell.value();
        acc.add(s);
        let total = acc.value();
        last_ratio = if total != 0.0 { (s / total).abs() } else { s.abs() };
        if d > 0 && (s == 0.0 || s.abs() <= params.tol * total.abs()) {
            quiet += 1;
            if quiet >= window {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        if terms > params.max_terms {
            break;
        }
    }
    Err(Error::SeriesBudget { terms, ratio: last_ratio })
}

/// Generalized hypergeometric `pFm(a; b; z) = Σ_k Π(a_i)_k / Π(b_j)_k · z^k / k!`.
pub fn hyper_pfm(a: &[f64], b: &[f64], z: f64, params: &SeriesParams) -> Result<f64> {
    params.validate()?;
    if let Some(bj) = b.iter().find(|&&bj| bj <= 0.0 && bj == bj.floor()) {
        return Err(Error::InvalidParameter(format!("denominator parameter {bj} is a nonpositive integer")));
    }
    let mut acc = CompensatedSum::new();
    let mut term = 1.0f64;
    acc.add(term);
    let mut quiet = 0;
    let cap = params.max_total_degree.min(params.max_terms);
    for k in 0..cap {
        let kf = k as f64;
        let num: f64 = a.iter().map(|&ai| ai + kf).product();
        let den: f64 = b.iter().map(|&bj| bj + kf).product();
        term *= num / den * z / (kf + 1.0);
        acc.add(term);
        if term == 0.0 {
            return Ok(acc.value());
        }
        // tail is geometric once the term ratio drops below one
        let ratio = (num / den * z / (kf + 1.0)).abs();
        if term.abs() <= params.tol * acc.value().abs() && ratio < 1.0 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(acc.value());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesBudget { terms: cap, ratio: (term / acc.value()).abs() })
}

fn check_denominator(name: &str, v: f64) -> Result<()> {
    if v <= 0.0 && v == v.floor() {
        Err(Error::InvalidParameter(format!("{name} = {v} is a nonpositive integer")))
    } else {
        Ok(())
    }
}

/// Sums `Σ_k term(k)` until two consecutive terms fall below `tol · |sum|`.
fn sum_1d<F: FnMut(usize) -> Result<f64>>(params: &SeriesParams, mut term: F) -> Result<f64> {
    params.validate()?;
    let mut acc = CompensatedSum::new();
    let mut quiet = 0;
    let cap = params.max_total_degree.min(params.max_terms);
    let mut last = 0.0;
    for k in 0..=cap {
        let t = term(k)?;
        acc.add(t);
        last = t;
        if k > 0 && t.abs() <= params.tol * acc.value().abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(acc.value());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesBudget { terms: cap, ratio: (last / acc.value()).abs() })
}

/// `(sign, ln|v|)` of a finite value.
fn sign_log(v: f64) -> (f64, f64) {
    if v == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (v.signum(), v.abs().ln())
    }
}

/// Horn `Φ₃(a; b; x, y) = Σ_{m,n} (a)_m / (b)_{m+n} · x^m/m! · y^n/n!`.
///
/// Summed as `Σ_n y^n / (n! (b)_n) · ₁F₁(a; b + n; x)`.
pub fn horn_phi3(a: f64, b: f64, x: f64, y: f64, params: &SeriesParams) -> Result<f64> {
    check_denominator("b", b)?;
    let mut pb = LogPoch::new(b);
    let mut py = LogPow::new(y);
    sum_1d(params, |n| {
        let (s1, l1) = py.get(n);
        if s1 == 0.0 {
            return Ok(0.0);
        }
        let (s2, l2) = pb.get(n);
        let (s3, l3) = sign_log(hyper_pfm(&[a], &[b + n as f64], x, params)?);
        Ok(s1 * s2 * s3 * (l1 - l2 + l3).exp())
    })
}

/// `F_I(a,b,c; z) = Σ (a)_{m1}(b)_{m2}(c)_{m3} / [(a+c)_{m1+m3}(b+c)_{m2+m3}] · z^m/m!`.
///
/// Summed over `m3` with the inner sums as
/// `₁F₁(a; a+c+m3; z1)/(a+c)_{m3}` and `₁F₁(b; b+c+m3; z2)/(b+c)_{m3}`.
pub fn lauricella_fi(a: f64, b: f64, c: f64, z: [f64; 3], params: &SeriesParams) -> Result<f64> {
    check_denominator("a+c", a + c)?;
    check_denominator("b+c", b + c)?;
    let mut pc = LogPoch::new(c);
    let (mut pac, mut pbc) = (LogPoch::new(a + c), LogPoch::new(b + c));
    let mut pz = LogPow::new(z[2]);
    sum_1d(params, |m| {
        let (s1, l1) = pz.get(m);
        let (s2, l2) = pc.get(m);
        if s1 * s2 == 0.0 {
            return Ok(0.0);
        }
        let (s3, l3) = pac.get(m);
        let (s4, l4) = pbc.get(m);
        let mf = m as f64;
        let (s5, l5) = sign_log(hyper_pfm(&[a], &[a + c + mf], z[0], params)?);
        let (s6, l6) = sign_log(hyper_pfm(&[b], &[b + c + mf], z[1], params)?);
        Ok(s1 * s2 * s3 * s4 * s5 * s6 * (l1 + l2 - l3 - l4 + l5 + l6).exp())
    })
}

/// `F_II(λ1, λ2; z) = Σ 1 / [(λ1)_{m1+m2+m3} (λ2)_{2m1+m2+m4}] · z^m/m!`.
///
/// For fixed `(m1, m2)` the `m3` and `m4` sums are one-variable series
/// `G_ν[a] = Σ_k w^k / (k! (ν)_{a+k}) = F_1(ν + a; w) / (ν)_a`, so the
/// quadruple series is summed as a double series over cached `G` tables.
pub fn lauricella_fii(l1: f64, l2: f64, z: [f64; 4], params: &SeriesParams) -> Result<f64> {
    check_denominator("lambda1", l1)?;
    check_denominator("lambda2", l2)?;
    let mut g1 = LogG::new(l1, z[2]);
    let mut g2 = LogG::new(l2, z[3]);
    let (mut p1, mut p2) = (LogPow::new(z[0]), LogPow::new(z[1]));
    let mut err = None;
    let v = shell_sum(2, params, 2, |m| {
        let (s1, a1) = p1.get(m[0]);
        let (s2, a2) = p2.get(m[1]);
        if s1 * s2 == 0.0 {
            return 0.0;
        }
        let r1 = g1.get(m[0] + m[1], params);
        let r2 = g2.get(2 * m[0] + m[1], params);
        match (r1, r2) {
            (Ok((t1, b1)), Ok((t2, b2))) => s1 * s2 * t1 * t2 * (a1 + a2 + b1 + b2).exp(),
            (Err(e), _) | (_, Err(e)) => {
                err.get_or_insert(e);
                0.0
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => v,
    }
}

/// Table of `G_ν[a] = F_1(ν + a; w) / (ν)_a` as sign and log-magnitude.
struct LogG {
    nu: f64,
    w: f64,
    poch: LogPoch,
    vals: Vec<(f64, f64)>,
}

impl LogG {
    fn new(nu: f64, w: f64) -> Self {
        LogG { nu, w, poch: LogPoch::new(nu), vals: Vec::new() }
    }

    fn get(&mut self, a: usize, params: &SeriesParams) -> Result<(f64, f64)> {
        while self.vals.len() <= a {
            let j = self.vals.len();
            let f = hyper_pfm(&[], &[self.nu + j as f64], self.w, params)?;
            let (ps, pl) = self.poch.get(j);
            if ps == 0.0 {
                return Err(Error::InvalidParameter(format!("({})_{j} vanishes in a denominator", self.nu)));
            }
            self.vals.push((f.signum() * ps, f.abs().ln() - pl));
        }
        Ok(self.vals[a])
    }
}

/// `₁F₃(λ; z) = Σ_l (λ)_{|l|} / [(λ)_{l2+l3+l4}(λ)_{l1+l3+l4}(λ)_{l1+l2+l4}] · z^l/l!`.
pub fn lauricella_1f3(lambda: f64, z: [f64; 4], params: &SeriesParams) -> Result<f64> {
    check_denominator("lambda", lambda)?;
    let mut p = LogPoch::new(lambda);
    let mut pz = z.map(LogPow::new);
    shell_sum(4, params, 2, |l| {
        let num = p.get(l[0] + l[1] + l[2] + l[3]);
        let d1 = p.get(l[1] + l[2] + l[3]);
        let d2 = p.get(l[0] + l[2] + l[3]);
        let d3 = p.get(l[0] + l[1] + l[3]);
        let mut s = num.0 * d1.0 * d2.0 * d3.0;
        let mut lg = num.1 - d1.1 - d2.1 - d3.1;
        for i in 0..4 {
            let (si, li) = pz[i].get(l[i]);
            s *= si;
            lg += li;
        }
        if s == 0.0 {
            0.0
        } else {
            s * lg.exp()
        }
    })
}
