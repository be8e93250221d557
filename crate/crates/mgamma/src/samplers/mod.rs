//! Exact samplers for the mgd and mfgd.
//!
//! Every algorithm is a [`RowSampler`] that draws one row from an
//! [`RngStream`]. [`run`] splits a batch into fixed-size shards, one stream
//! per shard, so output is identical for any thread count.

mod bivariate;
mod chain;
mod quadrivariate;
mod trivariate;

pub use bivariate::{BgdSampler, ExchangeableSampler};
pub use chain::MarkovSampler;
pub use quadrivariate::{mixture_lt4, quadrivariate_alphas, AlphaTable4, QgdSampler, SHAPE_SUMS4};
pub use trivariate::{mixture_lt3, trivariate_alphas, AlphaTable3, TgdSampler, TgdVariant};

use crate::affine_poly::io::spec_to_json;
use crate::affine_poly::{markov_chain_of, AffinePolynomial, MfgdSpec, MgdSpec, Spec};
use crate::{Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;

/// Rows drawn from one stream before moving to the next.
pub const SHARD_ROWS: usize = 8192;

/// ChaCha8 generator keyed by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `γ(scale, shape)` variate; shape 0 is the point mass at 0.
pub fn sample_gamma<R: RngCore + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !(shape >= 0.0 && shape.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma needs shape >= 0 and scale > 0, got ({shape}, {scale})")));
    }
    Ok(gamma_unchecked(shape, scale, rng))
}

/// Poisson variate; rate 0 gives 0.
pub fn sample_poisson<R: RngCore + ?Sized>(rate: f64, rng: &mut R) -> Result<u64> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("Poisson rate {rate} must be finite and >= 0")));
    }
    Ok(poisson_unchecked(rate, rng))
}

#[inline]
pub(crate) fn gamma_unchecked<R: RngCore + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    if shape == 0.0 {
        return 0.0;
    }
    Gamma::new(shape, scale).expect("validated gamma parameters").sample(rng)
}

#[inline]
pub(crate) fn poisson_unchecked<R: RngCore + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate == 0.0 {
        return 0;
    }
    let v: f64 = Poisson::new(rate).expect("validated Poisson rate").sample(rng);
    v as u64
}

/// One algorithm, ready to draw rows.
pub trait RowSampler: Sync {
    /// Number of coordinates per row.
    fn dim(&self) -> usize;

    /// Algorithm identifier recorded in batch metadata.
    fn algorithm(&self) -> &'static str;

    /// Fills `out` (length [`dim`](RowSampler::dim)) with one draw.
    fn draw(&self, rng: &mut RngStream, out: &mut [f64]);
}

/// `N × n` sample, row-major, with provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBatch {
    pub n: usize,
    #[serde(skip)]
    pub data: Vec<f64>,
    pub rows: usize,
    pub seed: u64,
    pub algorithm: String,
    /// SHA-256 of the canonical spec JSON.
    pub fingerprint: String,
    pub spec: serde_json::Value,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.iter().skip(j).step_by(self.n).copied().collect()
    }

    /// CSV with header `x1,…,xn`, full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in 0..self.rows {
            let row = self.row(r);
            let mut line = String::with_capacity(24 * self.n);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:?}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Sidecar metadata: spec, seed, N, algorithm and library version.
    pub fn metadata_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("batch metadata serializes");
        v["version"] = serde_json::Value::String(env!("CARGO_PKG_VERSION").to_string());
        v["shard_rows"] = serde_json::Value::from(SHARD_ROWS);
        serde_json::to_string_pretty(&v).expect("json value serializes")
    }
}

/// Hex SHA-256 of the canonical JSON of `spec`.
pub fn spec_fingerprint(spec: &Spec) -> String {
    let digest = Sha256::digest(spec_to_json(spec).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Draws `rows` rows with shard `k` on stream `k`, using up to `threads` threads.
pub fn run(sampler: &dyn RowSampler, spec: &Spec, rows: usize, seed: u64, threads: usize) -> Result<SampleBatch> {
    if rows == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let n = sampler.dim();
    let shards = rows.div_ceil(SHARD_ROWS);
    let fill = |k: usize, buf: &mut [f64]| {
        let mut rng = RngStream::new(seed, k as u64);
        for row in buf.chunks_mut(n) {
            sampler.draw(&mut rng, row);
        }
    };
    let mut data = vec![0.0; rows * n];
    let threads = threads.clamp(1, shards);
    if threads == 1 {
        for (k, chunk) in data.chunks_mut(SHARD_ROWS * n).enumerate() {
            fill(k, chunk);
        }
    } else {
        let chunks: Vec<(usize, &mut [f64])> = data.chunks_mut(SHARD_ROWS * n).enumerate().collect();
        let queue = std::sync::Mutex::new(chunks);
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(|| loop {
                    let next = queue.lock().expect("shard queue").pop();
                    match next {
                        Some((k, chunk)) => fill(k, chunk),
                        None => break,
                    }
                });
            }
        });
    }
    Ok(SampleBatch {
        n,
        data,
        rows,
        seed,
        algorithm: sampler.algorithm().to_string(),
        fingerprint: spec_fingerprint(spec),
        spec: serde_json::from_str(&spec_to_json(spec)).expect("spec json parses"),
    })
}

/// Sampling algorithms selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Exchangeable,
    Bgd,
    TgdA,
    TgdB,
    Qgd,
    Markov,
    Mfgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Exchangeable,
        Algorithm::Bgd,
        Algorithm::TgdA,
        Algorithm::TgdB,
        Algorithm::Qgd,
        Algorithm::Markov,
        Algorithm::Mfgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exchangeable => "exchangeable",
            Algorithm::Bgd => "bgd",
            Algorithm::TgdA => "tgd-a",
            Algorithm::TgdB => "tgd-b",
            Algorithm::Qgd => "qgd",
            Algorithm::Markov => "markov",
            Algorithm::Mfgd => "mfgd",
        }
    }

    pub fn parse(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }

    /// Default mgd algorithm for a polynomial: exchangeable or Markov when the
    /// structure is recognized, otherwise by dimension.
    pub fn auto(p: &AffinePolynomial) -> Result<Algorithm> {
        if p.n() >= 2 && p.exchangeable_param().is_some() {
            return Ok(Algorithm::Exchangeable);
        }
        match p.n() {
            2 => Ok(Algorithm::Bgd),
            3 => Ok(Algorithm::TgdA),
            4 => Ok(Algorithm::Qgd),
            _ if markov_chain_of(p).is_some() => Ok(Algorithm::Markov),
            n => Err(Error::InvalidParameter(format!(
                "no sampler for n = {n}: only n <= 4, exchangeable or Markovian polynomials are supported"
            ))),
        }
    }
}

/// Builds the mgd sampler `algo` for `spec`.
pub fn mgd_sampler(spec: &MgdSpec, algo: Algorithm) -> Result<Box<dyn RowSampler>> {
    let p = &spec.p;
    let lambda = spec.lambda;
    Ok(match algo {
        Algorithm::Exchangeable => {
            let q = p.exchangeable_param().ok_or_else(|| {
                Error::InvalidParameter("polynomial is not of the exchangeable form -q/p + (1/p)Π(1+pθ_i)".into())
            })?;
            Box::new(ExchangeableSampler::new(p.n(), q, lambda)?)
        }
        Algorithm::Bgd => Box::new(BgdSampler::new(p, lambda)?),
        Algorithm::TgdA => Box::new(TgdSampler::new(p, lambda, TgdVariant::A)?),
        Algorithm::TgdB => Box::new(TgdSampler::new(p, lambda, TgdVariant::B)?),
        Algorithm::Qgd => Box::new(QgdSampler::new(p, lambda)?),
        Algorithm::Markov => {
            let m = markov_chain_of(p)
                .ok_or_else(|| Error::InvalidParameter("polynomial is not a scaled Markovian polynomial".into()))?;
            Box::new(MarkovSampler::new(&m.rho, lambda, Some(&m.scales))?)
        }
        Algorithm::Mfgd => {
            return Err(Error::InvalidParameter("mfgd needs per-margin shapes; use mfgd_sampler".into()));
        }
    })
}

/// `X = Y + Z` with `Y` from the base mgd sampler and `Z_i ~ γ(p_i, λ_i - λ)`.
pub struct MfgdSampler {
    base: Box<dyn RowSampler>,
    scales: Vec<f64>,
    extra: Vec<f64>,
}

impl MfgdSampler {
    pub fn new(spec: &MfgdSpec, base: Algorithm) -> Result<Self> {
        let n = spec.p.n();
        if spec.lambdas.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: spec.lambdas.len() });
        }
        if let Some(l) = spec.lambdas.iter().find(|&&l| !(l >= spec.lambda)) {
            return Err(Error::InvalidParameter(format!("marginal shape {l} is below lambda = {}", spec.lambda)));
        }
        let base = mgd_sampler(&spec.base(), base)?;
        Ok(MfgdSampler {
            base,
            scales: (0..n).map(|i| spec.p.scale(i)).collect(),
            extra: spec.lambdas.iter().map(|l| l - spec.lambda).collect(),
        })
    }
}

impl RowSampler for MfgdSampler {
    fn dim(&self) -> usize {
        self.scales.len()
    }

    fn algorithm(&self) -> &'static str {
        "mfgd"
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        self.base.draw(rng, out);
        for i in 0..out.len() {
            out[i] += gamma_unchecked(self.extra[i], self.scales[i], rng);
        }
    }
}

/// Sampler for any spec: mgd with `algo` (or the automatic choice), mfgd on
/// top of the automatic base when the spec carries marginal shapes.
pub fn sampler_for(spec: &Spec, algo: Option<Algorithm>) -> Result<Box<dyn RowSampler>> {
    match spec {
        Spec::Mgd(s) => {
            let a = match algo {
                Some(a) => a,
                None => Algorithm::auto(&s.p)?,
            };
            mgd_sampler(s, a)
        }
        Spec::Mfgd(s) => {
            let base = match algo {
                None | Some(Algorithm::Mfgd) => Algorithm::auto(&s.p)?,
                Some(a) => a,
            };
            Ok(Box::new(MfgdSampler::new(s, base)?))
        }
    }
}

/// Samples `spec` with the given or automatic algorithm.
pub fn sample_spec(spec: &Spec, algo: Option<Algorithm>, rows: usize, seed: u64, threads: usize) -> Result<SampleBatch> {
    let s = sampler_for(spec, algo)?;
    run(s.as_ref(), spec, rows, seed, threads)
}

pub fn sample_exchangeable(n: usize, p: f64, lambda: f64, rows: usize, seed: u64) -> Result<SampleBatch> {
    let s = ExchangeableSampler::new(n, p, lambda)?;
    let spec = Spec::Mgd(MgdSpec::new(AffinePolynomial::exchangeable(n, p)?, lambda)?);
    run(&s, &spec, rows, seed, 1)
}

pub fn sample_bgd(p: &AffinePolynomial, lambda: f64, rows: usize, seed: u64) -> Result<SampleBatch> {
    let s = BgdSampler::new(p, lambda)?;
    run(&s, &Spec::Mgd(MgdSpec::new(p.clone(), lambda)?), rows, seed, 1)
}

pub fn sample_tgd(p: &AffinePolynomial, lambda: f64, rows: usize, variant: TgdVariant, seed: u64) -> Result<SampleBatch> {
    let s = TgdSampler::new(p, lambda, variant)?;
    run(&s, &Spec::Mgd(MgdSpec::new(p.clone(), lambda)?), rows, seed, 1)
}

pub fn sample_qgd(p: &AffinePolynomial, lambda: f64, rows: usize, seed: u64) -> Result<SampleBatch> {
    let s = QgdSampler::new(p, lambda)?;
    run(&s, &Spec::Mgd(MgdSpec::new(p.clone(), lambda)?), rows, seed, 1)
}

pub fn sample_markov(rho: &[f64], lambda: f64, rows: usize, scales: Option<&[f64]>, seed: u64) -> Result<SampleBatch> {
    let s = MarkovSampler::new(rho, lambda, scales)?;
    let p = crate::affine_poly::markov_polynomial(&crate::affine_poly::markov_sqrt_matrix(rho)?, scales)?;
    run(&s, &Spec::Mgd(MgdSpec::new(p, lambda)?), rows, seed, 1)
}

pub fn sample_mfgd(spec: &MfgdSpec, rows: usize, seed: u64) -> Result<SampleBatch> {
    let s = MfgdSampler::new(spec, Algorithm::auto(&spec.p)?)?;
    run(&s, &Spec::Mfgd(spec.clone()), rows, seed, 1)
}
