//! Monte-Carlo estimates q′ of category distributions, with convergence
//! traces.
//!
//! Sample j is drawn by stream j mod S, where the S streams come from
//! [`BitSource::jump_streams`]. Each stream runs independently and the
//! per-stream bin counts are added in stream order, so a trace depends only
//! on (seed, S, M, checkpoint cadence).

mod sampler;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use sampler::{multinomial_sample, BlockFrequencySampler, Sampler};

use crate::bitgen::{BitSource, Derivation, SourceKind};
use crate::discrepancy::{chi2_discrepancy, max_ratio_dev};
use crate::error::{Error, Result};
use crate::exactdist::{uniform, CategoryDistribution, Provenance};
use crate::onelevel::{DftVariance, OneLevelTest, TestSpec};

pub const DEFAULT_STREAMS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Total samples M.
    pub samples: u64,
    pub nu: u32,
    pub streams: usize,
    /// Trace cadence in samples; `None` means M/100.
    pub checkpoint_every: Option<u64>,
    pub source: SourceKind,
    pub seed: u64,
}

impl McOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            nu: 9,
            streams: DEFAULT_STREAMS,
            checkpoint_every: None,
            source: SourceKind::Mt19937,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Domain("sample count M must be positive".into()));
        }
        if self.streams == 0 {
            return Err(Error::Domain("need at least one stream".into()));
        }
        if self.nu == 0 {
            return Err(Error::Domain("nu must be positive".into()));
        }
        if self.checkpoint_every == Some(0) {
            return Err(Error::Domain("checkpoint cadence must be positive".into()));
        }
        if self.source == SourceKind::File {
            return Err(Error::Unsupported(
                "Monte-Carlo estimation needs a generator, not a FILE source".into(),
            ));
        }
        Ok(())
    }

    fn checkpoints(&self) -> Vec<u64> {
        let every = self.checkpoint_every.unwrap_or((self.samples / 100).max(1));
        let mut out: Vec<u64> = (1..).map(|i| i * every).take_while(|&c| c < self.samples).collect();
        out.push(self.samples);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub samples: u64,
    pub delta: f64,
    pub u: f64,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McTrace {
    pub checkpoints: Vec<TracePoint>,
    /// q′ with stderr √(q′(1−q′)/M).
    pub distribution: CategoryDistribution,
    pub counts: Vec<u64>,
    pub delta: f64,
    pub u: f64,
    /// Jackknife standard deviations over streams.
    pub delta_sd: f64,
    pub u_sd: f64,
    /// Expected upward bias of the plug-in δ, Σ q′(1 − q′)/(M p_i).
    pub delta_bias: f64,
    pub options: McOptions,
    pub streams: Vec<Derivation>,
}

impl McTrace {
    /// `M,delta,u,q0,…,qν` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let nu = self.options.nu as usize;
        let qs: Vec<String> = (0..=nu).map(|i| format!("q{i}")).collect();
        writeln!(w, "M,delta,u,{}", qs.join(","))?;
        for c in &self.checkpoints {
            let q: Vec<String> = c.q.iter().map(|x| format!("{x:.15e}")).collect();
            writeln!(w, "{},{:.15e},{:.15e},{}", c.samples, c.delta, c.u, q.join(","))?;
        }
        Ok(())
    }
}

fn delta_u(counts: &[u64], total: u64, null: &[f64]) -> (f64, f64, Vec<f64>) {
    let q: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let d = chi2_discrepancy(&q, null).expect("counts form a distribution");
    let u = max_ratio_dev(&q, null).expect("counts form a distribution");
    (d, u, q)
}

/// Number of samples j < c with j ≡ s (mod S).
fn owned_before(c: u64, s: u64, streams: u64) -> u64 {
    if c <= s {
        0
    } else {
        (c - s).div_ceil(streams)
    }
}

/// Runs `sampler` M times across the configured streams and summarises the
/// binned p-values.
pub fn run_mc<S: Sampler>(sampler: &S, label: &str, opts: &McOptions) -> Result<McTrace> {
    opts.validate()?;
    let nbins = opts.nu as usize + 1;
    let checkpoints = opts.checkpoints();
    let root = BitSource::from_u64(opts.source, opts.seed)?;
    let sources = root.jump_streams(opts.streams);
    let derivations: Vec<Derivation> = sources.iter().map(|s| s.derivation().clone()).collect();
    let s_count = opts.streams as u64;

    // Per stream: counts snapshot at every checkpoint.
    let per_stream: Vec<Result<Vec<Vec<u64>>>> = sources
        .into_par_iter()
        .enumerate()
        .map(|(s, mut src)| {
            let mut counts = vec![0u64; nbins];
            let mut snaps = Vec::with_capacity(checkpoints.len());
            let mut drawn = 0u64;
            let mut scratch = sampler.scratch();
            for &c in &checkpoints {
                let need = owned_before(c, s as u64, s_count);
                while drawn < need {
                    let p = sampler.sample_p(&mut src, &mut scratch)?;
                    counts[crate::exactdist::interval_index(p, opts.nu)] += 1;
                    drawn += 1;
                }
                snaps.push(counts.clone());
            }
            Ok(snaps)
        })
        .collect();
    let per_stream: Vec<Vec<Vec<u64>>> = per_stream.into_iter().collect::<Result<_>>()?;

    let null = uniform(opts.nu);
    let trace: Vec<TracePoint> = checkpoints
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let mut counts = vec![0u64; nbins];
            for stream in &per_stream {
                for (t, v) in counts.iter_mut().zip(&stream[ci]) {
                    *t += v;
                }
            }
            let (delta, u, q) = delta_u(&counts, c, &null);
            TracePoint { samples: c, delta, u, q }
        })
        .collect();

    let m = opts.samples;
    let finals: Vec<&Vec<u64>> = per_stream.iter().map(|s| s.last().unwrap()).collect();
    let mut counts = vec![0u64; nbins];
    for f in &finals {
        for (t, v) in counts.iter_mut().zip(f.iter()) {
            *t += v;
        }
    }
    let (delta, u, q) = delta_u(&counts, m, &null);

    // Leave-one-stream-out jackknife.
    let (mut delta_sd, mut u_sd) = (0.0, 0.0);
    if opts.streams > 1 {
        let loo: Vec<(f64, f64)> = finals
            .iter()
            .filter_map(|f| {
                let rest: Vec<u64> = counts.iter().zip(f.iter()).map(|(a, b)| a - b).collect();
                let total: u64 = rest.iter().sum();
                (total > 0).then(|| {
                    let (d, u, _) = delta_u(&rest, total, &null);
                    (d, u)
                })
            })
            .collect();
        if loo.len() > 1 {
            let g = loo.len() as f64;
            let md = loo.iter().map(|x| x.0).sum::<f64>() / g;
            let mu = loo.iter().map(|x| x.1).sum::<f64>() / g;
            delta_sd = ((g - 1.0) / g * loo.iter().map(|x| (x.0 - md).powi(2)).sum::<f64>()).sqrt();
            u_sd = ((g - 1.0) / g * loo.iter().map(|x| (x.1 - mu).powi(2)).sum::<f64>()).sqrt();
        }
    }
    let delta_bias = q
        .iter()
        .zip(&null)
        .map(|(&x, &p)| x * (1.0 - x) / (m as f64 * p))
        .sum();

    let mut distribution = CategoryDistribution::new(label, q.clone(), Provenance::MonteCarlo)?;
    distribution.stderr = Some(q.iter().map(|&x| (x * (1.0 - x) / m as f64).sqrt()).collect());
    distribution.mass_accounted = 1.0;
    Ok(McTrace {
        checkpoints: trace,
        distribution,
        counts,
        delta,
        u,
        delta_sd,
        u_sd,
        delta_bias,
        options: opts.clone(),
        streams: derivations,
    })
}

/// q′ for a multinomial class test by sampling class counts directly.
pub fn mc_class_q(spec: &TestSpec, opts: &McOptions) -> Result<McTrace> {
    run_mc(&sampler::ClassSampler::new(spec), &spec.name, opts)
}

/// q′ for the Block Frequency test with n-bit sequences and m-bit blocks.
pub fn mc_block_frequency_q(n: u64, m: u64, opts: &McOptions) -> Result<McTrace> {
    let s = BlockFrequencySampler::new(n, m)?;
    run_mc(&s, &format!("block-frequency(m={m}), n={n}"), opts)
}

/// q′ by running a one-level test on M generated n-bit sequences.
pub fn mc_sequence_q(test: OneLevelTest, n: usize, opts: &McOptions) -> Result<McTrace> {
    if test.channels() != 1 {
        return Err(Error::Unsupported(format!("{test} yields several p-values per sequence")));
    }
    test.validate(n)?;
    run_mc(&sampler::SequenceSampler { test, n }, &format!("{test}, n={n}"), opts)
}

/// Sequence-level DFT estimate with the given variance model.
pub fn mc_dft_q(n: usize, variance: DftVariance, opts: &McOptions) -> Result<McTrace> {
    mc_sequence_q(OneLevelTest::Dft { variance }, n, opts)
}
