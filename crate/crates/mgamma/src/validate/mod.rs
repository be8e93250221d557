//! Statistical verification of samples against Laplace transforms,
//! marginal laws and densities.
//!
//! Every check yields a [`CheckRecord`]. Negative controls are designed to
//! be rejected; their record passes when the underlying test rejects.
//! All tests run at the 1% level with no multiplicity correction.

pub mod fixtures;
pub mod identities;
mod suite;

pub use suite::{run_suite, SuiteConfig, DEFAULT_ROWS, DEFAULT_SEED, QUICK_ROWS};

use crate::affine_poly::{lt_value, Spec};
use crate::quadrature::gauss_legendre;
use crate::samplers::SampleBatch;
use crate::specfun::reg_lower_incomplete_gamma;
use crate::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic 1% critical value of `√N · D` for the one-sample KS test.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

/// Largest acceptable `|z|` for a Laplace-transform point.
pub const LT_Z_LIMIT: f64 = 3.0;

/// One check: `pass` is `statistic < threshold` for ordinary checks and the
/// reverse for negative controls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub mandatory: bool,
    pub negative_control: bool,
    pub metadata: Value,
}

impl CheckRecord {
    /// Ordinary check passing iff `statistic < threshold`.
    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64, metadata: Value) -> Self {
        CheckRecord {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic < threshold,
            mandatory: true,
            negative_control: false,
            metadata,
        }
    }

    /// Turns an ordinary check into a negative control: it now passes iff the
    /// original check failed.
    pub fn into_control(mut self) -> Self {
        self.pass = !self.pass;
        self.negative_control = true;
        self
    }

    /// A failed check carrying an error message.
    pub fn error(name: impl Into<String>, err: &Error) -> Self {
        CheckRecord {
            name: name.into(),
            statistic: f64::NAN,
            threshold: f64::NAN,
            pass: false,
            mandatory: true,
            negative_control: false,
            metadata: json!({ "error": err.to_string() }),
        }
    }
}

/// Checks ordered by name; `pass` iff every mandatory check passes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub metadata: Value,
}

impl ValidationReport {
    pub fn new(mut checks: Vec<CheckRecord>, metadata: Value) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = checks.iter().filter(|c| c.mandatory).all(|c| c.pass);
        ValidationReport { pass, checks, metadata }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.mandatory && !c.pass)
    }
}

/// Sample mean, unbiased covariance and the implied correlation.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// NaN wherever a column has zero variance.
    pub correlation: Vec<Vec<f64>>,
    /// Columns with zero sample variance.
    pub degenerate: Vec<usize>,
}

pub fn empirical_moments(batch: &SampleBatch) -> Result<Moments> {
    let (n, rows) = (batch.n, batch.rows);
    if rows < 2 {
        return Err(Error::InvalidParameter(format!("moments need at least 2 rows, got {rows}")));
    }
    let mut mean = vec![0.0; n];
    for r in 0..rows {
        for (m, x) in mean.iter_mut().zip(batch.row(r)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut cov = vec![vec![0.0; n]; n];
    let mut centered = vec![0.0; n];
    for r in 0..rows {
        for (c, (x, m)) in centered.iter_mut().zip(batch.row(r).iter().zip(&mean)) {
            *c = x - m;
        }
        for i in 0..n {
            for j in i..n {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            cov[i][j] /= (rows - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let degenerate: Vec<usize> = (0..n).filter(|&i| cov[i][i] == 0.0).collect();
    let correlation = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if cov[i][i] == 0.0 || cov[j][j] == 0.0 {
                        f64::NAN
                    } else {
                        cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()
                    }
                })
                .collect()
        })
        .collect();
    Ok(Moments { mean, covariance: cov, correlation, degenerate })
}

/// Empirical `E e^{-⟨θ,X⟩}` against `lt_value(spec, θ)` at each point;
/// a point passes iff `|z| < 3` with `z` in standard errors.
pub fn lt_check(batch: &SampleBatch, spec: &Spec, theta_points: &[Vec<f64>]) -> Result<Vec<CheckRecord>> {
    let rows = batch.rows as f64;
    let mut out = Vec::with_capacity(theta_points.len());
    for (k, theta) in theta_points.iter().enumerate() {
        if theta.len() != batch.n {
            return Err(Error::DimensionMismatch { expected: batch.n, got: theta.len() });
        }
        if theta.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::InvalidParameter(format!("LT points need θ >= 0, got {theta:?}")));
        }
        let (mut s, mut s2) = (0.0, 0.0);
        for r in 0..batch.rows {
            let e = (-batch.row(r).iter().zip(theta).map(|(x, t)| x * t).sum::<f64>()).exp();
            s += e;
            s2 += e * e;
        }
        let emp = s / rows;
        let var = ((s2 - rows * emp * emp) / (rows - 1.0).max(1.0)).max(0.0);
        let se = (var / rows).sqrt();
        let exact = lt_value(spec, theta)?;
        let diff = emp - exact;
        let z = if se > 0.0 {
            diff / se
        } else if diff.abs() <= 1e-15 {
            0.0
        } else {
            f64::INFINITY
        };
        out.push(CheckRecord::below(
            format!("lt[{k:02}]"),
            z.abs(),
            LT_Z_LIMIT,
            json!({ "theta": theta, "empirical": emp, "std_error": se, "exact": exact, "z": z }),
        ));
    }
    Ok(out)
}

/// Kolmogorov–Smirnov statistic of column `i` against `γ(scale, shape)`;
/// passes iff `D < 1.63/√N`.
pub fn marginal_gof(batch: &SampleBatch, i: usize, scale: f64, shape: f64) -> Result<CheckRecord> {
    if i >= batch.n {
        return Err(Error::DimensionMismatch { expected: batch.n, got: i + 1 });
    }
    if !(scale > 0.0 && shape > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma margin needs scale, shape > 0, got ({scale}, {shape})")));
    }
    let mut col = batch.column(i);
    col.sort_by(f64::total_cmp);
    let n = col.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in col.iter().enumerate() {
        let f = reg_lower_incomplete_gamma(shape, x.max(0.0) / scale)?;
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    Ok(CheckRecord::below(
        format!("ks[x{}]", i + 1),
        d,
        KS_CRITICAL_1PCT / n.sqrt(),
        json!({ "scale": scale, "shape": shape, "rows": col.len() }),
    ))
}

/// Rectangular histogram grid `[x_edges] × [y_edges]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
}

impl Grid2d {
    /// `bins × bins` equal cells on `[0, hi_x] × [0, hi_y]`.
    pub fn uniform(hi_x: f64, hi_y: f64, bins: usize) -> Self {
        let edges = |hi: f64| (0..=bins).map(|k| hi * k as f64 / bins as f64).collect();
        Grid2d { x_edges: edges(hi_x), y_edges: edges(hi_y) }
    }
}

/// Chi-square test of a bivariate sample's histogram against cell
/// probabilities of `pdf`. Cells are integrated by 3×3 Gauss–Legendre; the
/// region outside the grid is one extra cell. Consecutive cells are merged
/// until each expected count is at least 5.
pub fn density_check_2d<F>(batch: &SampleBatch, pdf: F, grid: &Grid2d) -> Result<CheckRecord>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if batch.n != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: batch.n });
    }
    let (nx, ny) = (grid.x_edges.len() - 1, grid.y_edges.len() - 1);
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("histogram grid needs at least one cell".into()));
    }
    let rows = batch.rows as f64;
    let mut observed = vec![0.0; nx * ny + 1];
    for r in 0..batch.rows {
        let x = batch.row(r);
        let cell = match (locate(&grid.x_edges, x[0]), locate(&grid.y_edges, x[1])) {
            (Some(i), Some(j)) => i * ny + j,
            _ => nx * ny,
        };
        observed[cell] += 1.0;
    }
    let (gx, gw) = gauss_legendre(3);
    let mut expected = vec![0.0; nx * ny + 1];
    let mut inside = 0.0;
    for i in 0..nx {
        let (a, b) = (grid.x_edges[i], grid.x_edges[i + 1]);
        for j in 0..ny {
            let (c, d) = (grid.y_edges[j], grid.y_edges[j + 1]);
            let mut mass = 0.0;
            for (u, wu) in gx.iter().zip(&gw) {
                for (v, wv) in gx.iter().zip(&gw) {
                    let x = 0.5 * (a + b) + 0.5 * (b - a) * u;
                    let y = 0.5 * (c + d) + 0.5 * (d - c) * v;
                    mass += wu * wv * pdf(x, y)?;
                }
            }
            mass *= 0.25 * (b - a) * (d - c);
            expected[i * ny + j] = rows * mass;
            inside += mass;
        }
    }
    expected[nx * ny] = rows * (1.0 - inside).max(0.0);
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (ob, ex) in observed.iter().zip(&expected) {
        o += ob;
        e += ex;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    match bins.last_mut() {
        Some(last) => {
            last.0 += o;
            last.1 += e;
        }
        None => bins.push((o, e)),
    }
    let chi2: f64 = bins.iter().map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else { f64::INFINITY }).sum();
    let dof = bins.len().saturating_sub(1).max(1);
    let threshold = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(0.99);
    Ok(CheckRecord::below(
        "density_chi2",
        chi2,
        threshold,
        json!({ "bins": bins.len(), "dof": dof, "grid_mass": inside }),
    ))
}

fn locate(edges: &[f64], v: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if !(v >= edges[0] && v < edges[last]) {
        return None;
    }
    Some(edges.partition_point(|&e| e <= v) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_poly::{AffinePolynomial, MgdSpec};
    use crate::samplers::{sample_bgd, sample_exchangeable, run, RowSampler, RngStream, gamma_unchecked};
    use crate::specfun::{pdf_bgd, SeriesParams};
    use fixtures::p2;

    struct Independent(Vec<f64>, f64);

    impl RowSampler for Independent {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn algorithm(&self) -> &'static str {
            "independent"
        }
        fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
            for (o, s) in out.iter_mut().zip(&self.0) {
                *o = gamma_unchecked(self.1, *s, rng);
            }
        }
    }

    fn independent_batch(scales: &[f64], shape: f64, rows: usize, seed: u64) -> (SampleBatch, Spec) {
        let spec = Spec::Mgd(MgdSpec::new(AffinePolynomial::independent(scales).unwrap(), shape).unwrap());
        (run(&Independent(scales.to_vec(), shape), &spec, rows, seed, 1).unwrap(), spec)
    }

    fn gamma_pdf(scale: f64, shape: f64, x: f64) -> f64 {
        ((shape - 1.0) * x.ln() - x / scale - shape * scale.ln() - statrs::function::gamma::ln_gamma(shape)).exp()
    }

    #[test]
    fn moments_of_independent_and_constant_columns() {
        let (b, _) = independent_batch(&[1.0, 2.0], 2.0, 100_000, 1);
        let m = empirical_moments(&b).unwrap();
        assert!(m.correlation[0][1].abs() < 3.0 / (1e5f64).sqrt());
        assert!((m.mean[1] - 4.0).abs() < 0.05);
        let mut c = b.clone();
        for r in 0..c.rows {
            c.data[2 * r] = 1.5;
        }
        let m = empirical_moments(&c).unwrap();
        assert_eq!(m.covariance[0][0], 0.0);
        assert!(m.correlation[0][1].is_nan());
        assert_eq!(m.degenerate, vec![0]);
        c.rows = 1;
        assert!(empirical_moments(&c).is_err());
        let m = empirical_moments(&sample_bgd(&p2(), 2.0, 100_000, 2).unwrap()).unwrap();
        assert!((m.correlation[0][1] - 8.0 / 9.0).abs() < 0.01);
    }

    #[test]
    fn lt_points_and_wrong_lambda() {
        let b = sample_bgd(&p2(), 2.0, 200_000, 3).unwrap();
        let spec = Spec::Mgd(MgdSpec::new(p2(), 2.0).unwrap());
        let pts = vec![vec![0.0, 0.0], vec![0.1, 0.2], vec![0.3, 0.05]];
        let recs = lt_check(&b, &spec, &pts).unwrap();
        assert_eq!(recs[0].statistic, 0.0);
        assert!(recs.iter().all(|r| r.pass), "{recs:?}");
        let wrong = Spec::Mgd(MgdSpec::new(p2(), 2.5).unwrap());
        assert!(lt_check(&b, &wrong, &pts[1..]).unwrap().iter().all(|r| !r.pass));
        assert!(lt_check(&b, &spec, &[vec![-0.1, 0.0]]).is_err());
    }

    #[test]
    fn ks_null_and_power() {
        let (b, _) = independent_batch(&[1.5], 2.5, 100_000, 4);
        assert!(marginal_gof(&b, 0, 1.5, 2.5).unwrap().pass);
        assert!(!marginal_gof(&b, 0, 3.0, 2.5).unwrap().pass);
    }

    #[test]
    fn chi_square_on_bgd_and_controls() {
        let b = sample_bgd(&p2(), 2.0, 200_000, 5).unwrap();
        let sp = SeriesParams::default();
        let grid = Grid2d::uniform(24.0, 24.0, 16);
        let ok = density_check_2d(&b, |x, y| pdf_bgd(&p2(), 2.0, &[x, y], &sp), &grid).unwrap();
        assert!(ok.pass, "{ok:?}");
        let indep = density_check_2d(&b, |x, y| Ok(gamma_pdf(3.0, 2.0, x) * gamma_pdf(3.0, 2.0, y)), &grid).unwrap();
        assert!(!indep.pass);
        // q → 0: exchangeable with p near 1 is independent
        let e = sample_exchangeable(2, 1.0 - 1e-12, 2.0, 100_000, 6).unwrap();
        let g = Grid2d::uniform(8.0, 8.0, 12);
        let r = density_check_2d(&e, |x, y| Ok(gamma_pdf(1.0, 2.0, x) * gamma_pdf(1.0, 2.0, y)), &g).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn report_ordering_and_verdict() {
        let a = CheckRecord::below("b", 1.0, 2.0, Value::Null);
        let c = CheckRecord::below("a", 3.0, 2.0, Value::Null).into_control();
        let r = ValidationReport::new(vec![a.clone(), c], Value::Null);
        assert!(r.pass);
        assert_eq!(r.checks[0].name, "a");
        let r = ValidationReport::new(vec![a, CheckRecord::below("c", 3.0, 2.0, Value::Null)], Value::Null);
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        assert!(ValidationReport::new(vec![], Value::Null).pass);
    }
}
