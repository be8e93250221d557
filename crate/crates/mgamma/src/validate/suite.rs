//! The fixture suite: sampler checks, negative controls and identities.

use super::fixtures::{self, fixture, Fixture, FIXTURE_NAMES};
use super::identities::{all_identity_residuals, mixture_residual};
use super::{
    density_check_2d, empirical_moments, lt_check, marginal_gof, CheckRecord, Grid2d, ValidationReport, KS_CRITICAL_1PCT,
};
use crate::affine_poly::{theoretical_correlation, AffinePolynomial, Spec};
use crate::samplers::{sample_spec, SampleBatch};
use crate::specfun::{pdf_bgd, SeriesParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

pub const DEFAULT_ROWS: usize = 200_000;
pub const QUICK_ROWS: usize = 20_000;
pub const DEFAULT_SEED: u64 = 1;

/// Which fixtures to run, with what sample size and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Names from [`FIXTURE_NAMES`].
    pub fixtures: Vec<String>,
    /// Also run the polynomial identity and mixture checks.
    pub identities: bool,
    /// Include the designed-to-fail controls.
    pub negative_controls: bool,
    pub seed: u64,
    /// Base sample size; fixtures may scale it.
    pub rows: usize,
    /// Bonferroni-correct the KS and LT thresholds. Correlation tolerances
    /// widen by `√(DEFAULT_ROWS / rows)` whenever `rows` is below the default.
    pub quick: bool,
    pub threads: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            fixtures: FIXTURE_NAMES.iter().filter(|n| **n != "corrupted-bgd").map(|n| n.to_string()).collect(),
            identities: true,
            negative_controls: true,
            seed: DEFAULT_SEED,
            rows: DEFAULT_ROWS,
            quick: false,
            threads: 1,
        }
    }
}

impl SuiteConfig {
    /// Default fixtures at [`QUICK_ROWS`].
    pub fn quick() -> Self {
        SuiteConfig { rows: QUICK_ROWS, quick: true, ..Self::default() }
    }

    /// No fixtures, no identities: an empty, passing report.
    pub fn empty() -> Self {
        SuiteConfig { fixtures: vec![], identities: false, negative_controls: false, ..Self::default() }
    }
}

/// Runs every configured check. Unknown fixture names are an error; a
/// fixture that fails to build or is not infinitely divisible produces a
/// failed record and the suite moves on.
pub fn run_suite(config: &SuiteConfig) -> Result<ValidationReport> {
    if config.rows < 2 {
        return Err(Error::InvalidParameter(format!("suite needs rows >= 2, got {}", config.rows)));
    }
    let resolved: Vec<Fixture> = config.fixtures.iter().map(|n| fixture(n)).collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for f in &resolved {
        let stream = FIXTURE_NAMES.iter().position(|n| *n == f.name).expect("known fixture") as u64;
        let mut recs = fixture_checks(f, config, config.seed.wrapping_add(stream));
        for r in &mut recs {
            r.name = format!("{}/{}", f.name, r.name);
        }
        checks.extend(recs);
    }
    if config.identities {
        checks.extend(identity_checks());
    }
    if config.quick {
        bonferroni(&mut checks);
    }
    let metadata = json!({
        "seed": config.seed,
        "rows": config.rows,
        "quick": config.quick,
        "fixtures": config.fixtures,
        "significance": 0.01,
        "multiplicity": if config.quick {
            "quick mode: KS and LT thresholds are Bonferroni-corrected so each family has a 1% false alarm rate"
        } else {
            "each check is tested at 1% without Bonferroni correction; with k checks the family-wise false alarm rate under the null is at most k%, and fixed seeds make the outcome reproducible"
        },
        "version": env!("CARGO_PKG_VERSION"),
    });
    Ok(ValidationReport::new(checks, metadata))
}

fn fixture_checks(f: &Fixture, config: &SuiteConfig, seed: u64) -> Vec<CheckRecord> {
    let p = f.spec.polynomial();
    match p.check_id() {
        Ok(rep) if rep.is_id => {}
        Ok(rep) => {
            let mut r = CheckRecord::below("check_id", rep.failing_conditions.len() as f64, 1.0, json!(rep));
            r.pass = false;
            return vec![r];
        }
        Err(e) => return vec![CheckRecord::error("check_id", &e)],
    }
    let rows = ((config.rows as f64) * f.size_factor).round() as usize;
    let batch = match sample_spec(&f.spec, Some(f.algorithm), rows, seed, config.threads.max(1)) {
        Ok(b) => b,
        Err(e) => return vec![CheckRecord::error("sample", &e)],
    };
    let mut out = Vec::new();
    if let Err(e) = sampler_checks(f, config, &batch, &mut out) {
        out.push(CheckRecord::error("checks", &e));
    }
    if config.negative_controls && f.name == "bgd-p2" {
        if let Err(e) = bgd_controls(&batch, &mut out) {
            out.push(CheckRecord::error("controls", &e));
        }
    }
    out
}

fn sampler_checks(f: &Fixture, config: &SuiteConfig, batch: &SampleBatch, out: &mut Vec<CheckRecord>) -> Result<()> {
    let n = batch.n;
    let widen = if config.rows < DEFAULT_ROWS { (DEFAULT_ROWS as f64 / config.rows as f64).sqrt() } else { 1.0 };
    let tol = f.corr_tol * widen;
    let m = empirical_moments(batch)?;
    let exact = theoretical_correlation(&f.spec);
    for i in 0..n {
        for j in i + 1..n {
            out.push(CheckRecord::below(
                format!("corr[{}{}]", i + 1, j + 1),
                (m.correlation[i][j] - exact[i][j]).abs(),
                tol,
                json!({ "empirical": m.correlation[i][j], "exact": exact[i][j] }),
            ));
        }
    }
    let pts = lt_points(f.spec.polynomial(), 10);
    out.extend(lt_check(batch, &f.spec, &pts)?);
    let shapes = f.spec.marginal_shapes();
    for i in 0..n {
        out.push(marginal_gof(batch, i, f.spec.polynomial().scale(i), shapes[i])?);
    }
    if f.name == "bgd-p2" {
        let sp = SeriesParams::default();
        let p = f.spec.polynomial().clone();
        let lambda = f.spec.lambda();
        out.push(density_check_2d(batch, |x, y| pdf_bgd(&p, lambda, &[x, y], &sp), &bgd_grid())?);
    }
    Ok(())
}

fn bgd_grid() -> Grid2d {
    Grid2d::uniform(24.0, 24.0, 16)
}

/// Wrong λ on the analytic side, doubled scale in the KS test, and the
/// independent product density in the chi-square test.
fn bgd_controls(batch: &SampleBatch, out: &mut Vec<CheckRecord>) -> Result<()> {
    let p = fixtures::p2();
    let wrong = Spec::Mgd(crate::affine_poly::MgdSpec::new(p.clone(), 2.5)?);
    let recs = lt_check(batch, &wrong, &lt_points(&p, 10))?;
    let worst = recs.iter().map(|r| r.statistic).fold(0.0, f64::max);
    out.push(
        CheckRecord::below("control/lt_wrong_lambda", worst, super::LT_Z_LIMIT, json!({ "lambda": 2.5 })).into_control(),
    );
    let mut ks = marginal_gof(batch, 0, 2.0 * p.scale(0), 2.0)?;
    ks.name = "control/ks_doubled_scale".into();
    out.push(ks.into_control());
    let lg = |x: f64| x.ln() - x / 3.0 - 2.0 * 3.0f64.ln();
    let mut chi = density_check_2d(batch, |x, y| Ok((lg(x) + lg(y)).exp()), &bgd_grid())?;
    chi.name = "control/density_independent".into();
    out.push(chi.into_control());
    Ok(())
}

/// Replaces the per-check 1% KS and LT thresholds by family-wise 1%
/// thresholds over the ordinary (non-control) checks of each kind.
fn bonferroni(checks: &mut [CheckRecord]) {
    let is = |c: &CheckRecord, tag: &str| !c.negative_control && c.name.contains(tag);
    let m_ks = checks.iter().filter(|c| is(c, "/ks[")).count().max(1) as f64;
    let m_lt = checks.iter().filter(|c| is(c, "/lt[")).count().max(1) as f64;
    let ks_c = ks_critical(0.01 / m_ks);
    let z = Normal::standard().inverse_cdf(1.0 - 0.005 / m_lt);
    for c in checks.iter_mut() {
        let threshold = if is(c, "/ks[") {
            c.threshold * ks_c / KS_CRITICAL_1PCT
        } else if is(c, "/lt[") {
            z
        } else {
            continue;
        };
        c.threshold = threshold;
        c.pass = c.statistic < threshold;
    }
}

/// Asymptotic KS critical value `√(-ln(α/2)/2)` of `√N · D` at level `α`.
fn ks_critical(alpha: f64) -> f64 {
    (-0.5 * (0.5 * alpha).ln()).sqrt()
}

/// `count` points with `θ_i = c_i / p_i`, `c_i ∈ [0.05, 0.5]`, so `P(θ) > 1`
/// and `e^{-⟨θ,X⟩}` has bounded variance.
pub(crate) fn lt_points(p: &AffinePolynomial, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            (0..p.n())
                .map(|i| {
                    let c = 0.05 + 0.45 * (((k + 1) * (i + 3)) as f64 * 0.618_033_988_75).fract();
                    c / p.scale(i)
                })
                .collect()
        })
        .collect()
}

fn identity_checks() -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let polys = [
        ("p2", fixtures::p2()),
        ("p3", fixtures::p3()),
        ("p4", fixtures::symmetric_p4()),
        ("q4", fixtures::q4()),
    ];
    for (name, p) in &polys {
        match all_identity_residuals(p) {
            Ok(rs) => out.extend(rs.into_iter().map(|(id, r)| {
                CheckRecord::below(format!("identity/{name}/{id}"), r, 1e-10, serde_json::Value::Null)
            })),
            Err(e) => out.push(CheckRecord::error(format!("identity/{name}"), &e)),
        }
    }
    for (name, p, tol) in [("p3", fixtures::p3(), 1e-8), ("p4", fixtures::symmetric_p4(), 1e-6), ("q4", fixtures::q4(), 1e-6)] {
        let rec = match mixture_residual(&p, 2.0) {
            Ok(r) => CheckRecord::below(format!("identity/{name}/mixture_lt"), r, tol, serde_json::Value::Null),
            Err(e) => CheckRecord::error(format!("identity/{name}/mixture_lt"), &e),
        };
        out.push(rec);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_passes() {
        let r = run_suite(&SuiteConfig::empty()).unwrap();
        assert!(r.pass && r.checks.is_empty());
    }

    #[test]
    fn unknown_fixture_is_an_error() {
        let c = SuiteConfig { fixtures: vec!["nope".into()], ..SuiteConfig::empty() };
        assert!(run_suite(&c).is_err());
    }

    #[test]
    fn corrupted_fixture_surfaces_and_suite_continues() {
        let c = SuiteConfig {
            fixtures: vec!["corrupted-bgd".into(), "bgd-q2".into()],
            rows: QUICK_ROWS,
            quick: true,
            ..SuiteConfig::empty()
        };
        let r = run_suite(&c).unwrap();
        assert!(!r.pass);
        let bad: Vec<_> = r.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(bad, ["corrupted-bgd/check_id"]);
        assert!(r.checks.iter().any(|c| c.name.starts_with("bgd-q2/lt")));
    }

    #[test]
    fn quick_bgd_with_controls_is_reproducible() {
        let c = SuiteConfig { fixtures: vec!["bgd-p2".into()], negative_controls: true, ..SuiteConfig::quick() };
        let a = run_suite(&c).unwrap();
        assert!(a.pass, "{:?}", a.failures().collect::<Vec<_>>());
        let controls: Vec<_> = a.checks.iter().filter(|c| c.negative_control).collect();
        assert_eq!(controls.len(), 3);
        assert_eq!(a.to_json(), run_suite(&c).unwrap().to_json());
    }

    #[test]
    fn ks_critical_matches_table() {
        assert!((ks_critical(0.01) - 1.6276).abs() < 1e-4);
        assert!((ks_critical(0.05) - 1.3581).abs() < 1e-4);
    }

    #[test]
    fn config_json_defaults() {
        let c: SuiteConfig = serde_json::from_str(r#"{"fixtures": ["bgd-p2"], "quick": true}"#).unwrap();
        assert_eq!(c.seed, DEFAULT_SEED);
        assert!(serde_json::from_str::<SuiteConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
