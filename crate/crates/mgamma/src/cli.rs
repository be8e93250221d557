//! The `mgamma` command-line front end.
//!
//! Exit codes: 0 success, 1 check or validation failure, 2 usage or parse error.

use crate::affine_poly::io::{read_spec, spec_to_json};
use crate::affine_poly::{markov_polynomial, markov_sqrt_matrix, MgdSpec, Spec};
use crate::combinat::mask_label;
use crate::samplers::{sample_spec, Algorithm};
use crate::specfun::{pdf_bgd, pdf_bivariate_mfgd, pdf_exchangeable, pdf_tgd, SeriesParams};
use crate::validate::{run_suite, SuiteConfig, DEFAULT_SEED, QUICK_ROWS};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "mgamma", version, about = "Infinitely divisible multivariate gamma distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the dual tables and the infinite-divisibility verdict of a spec.
    Check {
        /// JSON spec file.
        #[arg(long)]
        spec: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Draw a sample to CSV, with a `.json` metadata sidecar.
    Sample {
        #[arg(long)]
        spec: PathBuf,
        /// exchangeable, bgd, tgd-a, tgd-b, qgd, markov or mfgd; chosen from the spec if omitted.
        #[arg(long)]
        algo: Option<String>,
        /// Number of rows.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// CSV output path; the sidecar is written next to it with `.json` appended.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Evaluate the density on a grid and write CSV.
    Pdf {
        #[arg(long)]
        spec: PathBuf,
        /// One comma-separated entry per coordinate: `lo:hi:k` for k cell
        /// midpoints, or a single value to hold the coordinate fixed.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Run the validation suite and print the JSON report.
    Validate {
        /// JSON suite configuration; defaults to every fixture.
        #[arg(long)]
        config: Option<PathBuf>,
        /// 20,000 rows per fixture with correlation tolerances widened by √10.
        #[arg(long)]
        quick: bool,
        /// Base rows per fixture (overrides the config).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, env = "MGAMMA_SEED")]
        seed: Option<u64>,
        /// Report path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Write the spec file of a Markovian polynomial.
    Markov {
        /// Lag-one correlations, comma-separated, each in (0,1).
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        /// Per-axis scales, comma-separated (n = rho count + 1).
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Spec path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// RNG seed; falls back to MGAMMA_SEED, then 0.
    #[arg(long, env = "MGAMMA_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ThreadsArg {
    /// Worker threads; output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Relative truncation tolerance of the series.
    #[arg(long, default_value_t = SeriesParams::default().tol)]
    pub tol: f64,
    /// Cap on evaluated series terms.
    #[arg(long, default_value_t = SeriesParams::default().max_terms)]
    pub max_terms: usize,
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotInfinitelyDivisible(_)
        | Error::Hypothesis(_)
        | Error::ZeroCoefficient { .. }
        | Error::NonPositiveBase { .. }
        | Error::SeriesBudget { .. } => 1,
        _ => 2,
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Check { spec, json } => cmd_check(&spec, json, out),
        Command::Sample { spec, algo, n, seed, out: path, threads } => {
            cmd_sample(&spec, algo.as_deref(), n, seed.seed, &path, threads.threads, err)
        }
        Command::Pdf { spec, grid, out: path, series } => {
            let params = SeriesParams { tol: series.tol, max_terms: series.max_terms, ..SeriesParams::default() };
            params.validate()?;
            cmd_pdf(&spec, &grid, &path, &params, err)
        }
        Command::Validate { config, quick, n, seed, out: path, threads } => {
            let mut cfg = match config {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)
                    .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
                None => SuiteConfig::default(),
            };
            if quick {
                cfg.quick = true;
                cfg.rows = QUICK_ROWS;
            }
            if let Some(n) = n {
                cfg.rows = n;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.threads = threads.threads;
            cmd_validate(&cfg, path.as_deref(), out, err)
        }
        Command::Markov { rho, scales, lambda, out: path } => {
            let text = cmd_markov(&rho, scales.as_deref(), lambda)?;
            match path {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => writeln!(out, "{text}")?,
            }
            Ok(0)
        }
    }
}

/// Prints `p`, `p̃` and `b̃` per subset and the verdict; 0 iff id.
pub fn cmd_check(path: &Path, json: bool, out: &mut dyn Write) -> Result<i32> {
    let spec = read_spec(path)?;
    let p = spec.polynomial();
    let d = p.dual_tables()?;
    let report = p.check_id()?;
    if json {
        let rows: Vec<_> = (1..=p.full_mask())
            .map(|m| {
                serde_json::json!({
                    "subset": mask_label(m),
                    "p": p.coeff(m),
                    "p_tilde": d.p_tilde(m),
                    "b_tilde": d.b_tilde(m),
                })
            })
            .collect();
        let v = serde_json::json!({ "n": p.n(), "tables": rows, "report": report });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "{:<12} {:>16} {:>16} {:>16}", "subset", "p", "p_tilde", "b_tilde")?;
        let mut masks: Vec<u32> = (1..=p.full_mask()).collect();
        masks.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
        for m in masks {
            writeln!(
                out,
                "{:<12} {:>16.10} {:>16.10} {:>16.10}",
                mask_label(m),
                p.coeff(m),
                d.p_tilde(m),
                d.b_tilde(m)
            )?;
        }
        if report.is_id {
            writeln!(out, "verdict: infinitely divisible")?;
        } else {
            writeln!(out, "verdict: not infinitely divisible")?;
            for f in &report.failing_conditions {
                let flag = if f.borderline { " (borderline)" } else { "" };
                writeln!(out, "  fails at {{{}}}: {}{flag}", f.subset, f.value)?;
            }
        }
    }
    Ok(if report.is_id { 0 } else { 1 })
}

pub fn cmd_sample(
    spec_path: &Path,
    algo: Option<&str>,
    rows: usize,
    seed: u64,
    out: &Path,
    threads: usize,
    err: &mut dyn Write,
) -> Result<i32> {
    let spec = read_spec(spec_path)?;
    let algo = algo.map(Algorithm::parse).transpose()?;
    let batch = sample_spec(&spec, algo, rows, seed, threads.max(1))?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
    batch.write_csv(&mut w)?;
    w.flush()?;
    let sidecar = sidecar_path(out);
    std::fs::write(&sidecar, batch.metadata_json() + "\n")?;
    writeln!(err, "wrote {} rows ({}) to {} and {}", rows, batch.algorithm, out.display(), sidecar.display())?;
    Ok(0)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// One axis of a density grid.
#[derive(Clone, Debug, PartialEq)]
enum Axis {
    Cells { lo: f64, hi: f64, k: usize },
    Fixed(f64),
}

impl Axis {
    fn points(&self) -> Vec<f64> {
        match *self {
            Axis::Cells { lo, hi, k } => (0..k).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / k as f64).collect(),
            Axis::Fixed(v) => vec![v],
        }
    }
}

fn parse_grid(text: &str, n: usize) -> Result<Vec<Axis>> {
    let axes: Vec<Axis> = text
        .split(',')
        .enumerate()
        .map(|(i, part)| {
            let bad = |why: &str| Error::Parse(format!("--grid entry {} {part:?}: {why}", i + 1));
            let fields: Vec<&str> = part.trim().split(':').collect();
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
            match fields.as_slice() {
                [v] => {
                    let v = num(v)?;
                    if v > 0.0 { Ok(Axis::Fixed(v)) } else { Err(bad("fixed value must be positive")) }
                }
                [lo, hi, k] => {
                    let (lo, hi) = (num(lo)?, num(hi)?);
                    let k: usize = k.trim().parse().map_err(|_| bad("cell count is not an integer"))?;
                    if !(lo >= 0.0 && hi > lo && k > 0) {
                        return Err(bad("need 0 <= lo < hi and k > 0"));
                    }
                    Ok(Axis::Cells { lo, hi, k })
                }
                _ => Err(bad("expected lo:hi:k or a single value")),
            }
        })
        .collect::<Result<_>>()?;
    if axes.len() != n {
        return Err(Error::Parse(format!("--grid has {} entries, the spec has n = {n}", axes.len())));
    }
    Ok(axes)
}

/// Density at every grid point, in row-major order of the axes.
pub fn cmd_pdf(spec_path: &Path, grid: &str, out: &Path, params: &SeriesParams, err: &mut dyn Write) -> Result<i32> {
    let spec = read_spec(spec_path)?;
    let n = spec.n();
    let axes = parse_grid(grid, n)?;
    let p = spec.polynomial().clone();
    let eval: Box<dyn Fn(&[f64]) -> Result<f64>> = match &spec {
        Spec::Mgd(s) if n >= 2 && p.exchangeable_param().is_some() => {
            let q = p.exchangeable_param().expect("checked");
            let lambda = s.lambda;
            Box::new(move |x| pdf_exchangeable(n, q, lambda, x, params))
        }
        Spec::Mgd(s) if n == 2 => {
            let lambda = s.lambda;
            Box::new(move |x| pdf_bgd(&p, lambda, x, params))
        }
        Spec::Mgd(s) if n == 3 => {
            let lambda = s.lambda;
            Box::new(move |x| pdf_tgd(&p, lambda, x, params))
        }
        Spec::Mfgd(s) if n == 2 => {
            let shapes = [s.lambda, s.lambdas[0], s.lambdas[1]];
            Box::new(move |x| pdf_bivariate_mfgd(&p, shapes, x, params))
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "density export supports n = 2, n = 3 mgd, bivariate mfgd and exchangeable specs; got n = {n}"
            )))
        }
    };
    let points: Vec<Vec<f64>> = axes.iter().map(Axis::points).collect();
    let total: usize = points.iter().map(Vec::len).product();
    let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["density".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    for _ in 0..total {
        for i in 0..n {
            x[i] = points[i][idx[i]];
        }
        let f = eval(&x)?;
        let cols: Vec<String> = x.iter().chain(std::iter::once(&f)).map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", cols.join(","))?;
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] < points[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
    w.flush()?;
    writeln!(err, "wrote {total} grid points to {}", out.display())?;
    Ok(0)
}

/// Runs the suite; writes the report and returns 0 iff it passes.
pub fn cmd_validate(cfg: &SuiteConfig, path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let report = run_suite(cfg)?;
    let text = report.to_json();
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(out, "{text}")?,
    }
    for c in report.failures() {
        writeln!(err, "FAIL {} (statistic {:.4e}, threshold {:.4e})", c.name, c.statistic, c.threshold)?;
    }
    writeln!(
        err,
        "{} checks, {} failed, seed {}: {}",
        report.checks.len(),
        report.failures().count(),
        if cfg.seed == DEFAULT_SEED { "default".to_string() } else { cfg.seed.to_string() },
        if report.pass { "PASS" } else { "FAIL" }
    )?;
    Ok(if report.pass { 0 } else { 1 })
}

/// Spec JSON of the Markovian polynomial with lag-one correlations `rho`.
pub fn cmd_markov(rho: &[f64], scales: Option<&[f64]>, lambda: f64) -> Result<String> {
    let p = markov_polynomial(&markov_sqrt_matrix(rho)?, scales)?;
    Ok(spec_to_json(&Spec::Mgd(MgdSpec::new(p, lambda)?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:10:4, 1.5", 2).unwrap();
        assert_eq!(g[0].points(), vec![1.25, 3.75, 6.25, 8.75]);
        assert_eq!(g[1], Axis::Fixed(1.5));
        assert!(parse_grid("0:10:4", 2).is_err());
        assert!(parse_grid("0:10:x,1", 2).is_err());
        assert!(parse_grid("5:1:3,1", 2).is_err());
    }

    #[test]
    fn markov_listing() {
        let text = cmd_markov(&[0.81, 0.64, 0.49, 0.36], None, 1.0).unwrap();
        let spec = crate::affine_poly::io::parse_spec(&text).unwrap();
        let p = spec.polynomial();
        assert!((p.coeff(0b11) - 0.19).abs() < 1e-12);
        assert!((p.top() - 0.02232576).abs() < 1e-12);
        assert!(cmd_markov(&[1.2], None, 1.0).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["mgamma", "frobnicate"], &mut o, &mut e), 2);
        assert_eq!(run(["mgamma", "--help"], &mut o, &mut e), 0);
        assert!(String::from_utf8(o).unwrap().contains("validate"));
    }
}
