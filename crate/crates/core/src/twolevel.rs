//! Second-level testing: N first-level p-values on disjoint segments,
//! binned into ν+1 intervals and compared with a null by a chi-squared GOF.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgen::{BitBlock, BitSource, Derivation};
use crate::discrepancy::{group_thousands, P_SUM_TOLERANCE, Q_SUM_TOLERANCE};
use crate::error::{Error, Result};
use crate::exactdist::{interval_index, uniform, CategoryDistribution};
use crate::numerics::chi2_sf;
use crate::onelevel::OneLevelTest;

pub const DEFAULT_SIGNIFICANCE: f64 = 0.0001;
/// Segments read and evaluated per parallel batch.
const BATCH: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullKind {
    Uniform,
    Exact,
    Mc,
}

impl fmt::Display for NullKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NullKind::Uniform => "uniform",
            NullKind::Exact => "exact",
            NullKind::Mc => "mc",
        })
    }
}

impl FromStr for NullKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(NullKind::Uniform),
            "exact" => Ok(NullKind::Exact),
            "mc" => Ok(NullKind::Mc),
            _ => Err(Error::Domain(format!("unknown null kind {s:?}"))),
        }
    }
}

/// Category probabilities assumed at the second level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondLevelNull {
    pub kind: NullKind,
    pub probs: Vec<f64>,
    /// Label of the distribution the probabilities came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

impl SecondLevelNull {
    pub fn uniform(nu: u32) -> Self {
        Self {
            kind: NullKind::Uniform,
            probs: uniform(nu),
            origin: None,
        }
    }

    /// A corrected null from exact or estimated q. Probabilities that sum
    /// to 1 within the printed-table tolerance are renormalised.
    pub fn from_distribution(kind: NullKind, dist: &CategoryDistribution) -> Result<Self> {
        if kind == NullKind::Uniform {
            return Ok(Self::uniform(dist.nu));
        }
        let total: f64 = dist.q.iter().sum();
        if (total - 1.0).abs() > Q_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("null probabilities sum to {total}")));
        }
        let null = Self {
            kind,
            probs: dist.q.iter().map(|q| q / total).collect(),
            origin: Some(dist.label.clone()),
        };
        null.validate()?;
        Ok(null)
    }

    pub fn nu(&self) -> u32 {
        self.probs.len() as u32 - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.probs.len() < 2 {
            return Err(Error::InvalidDistribution("need at least two bins".into()));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > P_SUM_TOLERANCE || self.probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "not a probability vector (sum {total})"
            )));
        }
        Ok(())
    }
}

/// Counts of p-values per interval.
pub fn bin_pvalues(pvals: &[f64], nu: u32) -> Result<Vec<u64>> {
    let mut hist = vec![0u64; nu as usize + 1];
    for &p in pvals {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p-value {p} outside [0, 1]")));
        }
        hist[interval_index(p, nu)] += 1;
    }
    Ok(hist)
}

/// χ² = Σ (Y_i − N p_i)²/(N p_i) and its upper-tail probability.
pub fn gof_chi2(hist: &[u64], null: &SecondLevelNull) -> Result<(f64, f64)> {
    if hist.len() != null.probs.len() {
        return Err(Error::Domain(format!(
            "{} histogram bins but {} null probabilities",
            hist.len(),
            null.probs.len()
        )));
    }
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return Err(Error::Domain("empty histogram".into()));
    }
    if let Some(i) = null.probs.iter().position(|&p| p <= 0.0) {
        return Err(Error::InvalidDistribution(format!("null probability of bin {i} is zero")));
    }
    let nf = n as f64;
    let chi2: f64 = hist
        .iter()
        .zip(&null.probs)
        .map(|(&y, &p)| {
            let e = nf * p;
            (y as f64 - e).powi(2) / e
        })
        .sum();
    Ok((chi2, chi2_sf(null.nu(), chi2)?))
}

/// Histograms of the first `runs` results of a two-level run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PValueHistograms {
    pub test: OneLevelTest,
    pub n: usize,
    pub nu: u32,
    /// First-level runs that produced a result (N).
    pub runs: u64,
    /// Runs that produced none; their bits are consumed.
    pub discarded: u64,
    /// One histogram per channel.
    pub histograms: Vec<Vec<u64>>,
}

/// Applies `test` to consecutive n-bit segments of `source` until
/// `checkpoints.last()` results are collected, returning a snapshot at each
/// checkpoint. Checkpoints must be increasing.
pub fn collect_histograms(
    source: &mut BitSource,
    test: OneLevelTest,
    n: usize,
    nu: u32,
    checkpoints: &[u64],
) -> Result<Vec<PValueHistograms>> {
    test.validate(n)?;
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("checkpoints must be positive and increasing".into()));
    }
    let total = *checkpoints.last().unwrap();
    let channels = test.channels();
    let mut state = PValueHistograms {
        test,
        n,
        nu,
        runs: 0,
        discarded: 0,
        histograms: vec![vec![0; nu as usize + 1]; channels],
    };
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    let mut buffers: Vec<BitBlock> = Vec::new();
    while state.runs < total {
        let batch = BATCH.min(total - state.runs) as usize;
        buffers.resize_with(batch, || BitBlock::zeros(0));
        for b in &mut buffers[..batch] {
            source.next_block_into(b, n)?;
        }
        let results: Vec<Option<Vec<f64>>> = buffers[..batch]
            .par_iter()
            .map(|b| test.evaluate(b))
            .collect::<Result<_>>()?;
        for r in results {
            let Some(ps) = r else {
                state.discarded += 1;
                continue;
            };
            for (h, &p) in state.histograms.iter_mut().zip(&ps) {
                h[interval_index(p, nu)] += 1;
            }
            state.runs += 1;
            if state.runs == checkpoints[next_cp] {
                out.push(state.clone());
                next_cp += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelResult {
    pub label: String,
    pub null: SecondLevelNull,
    pub histogram: Vec<u64>,
    pub chi2: f64,
    pub p_second: f64,
    pub rejected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelResult {
    pub test: OneLevelTest,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: u64,
    pub nu: u32,
    pub significance: f64,
    pub discarded: u64,
    pub channels: Vec<ChannelResult>,
    pub source: Derivation,
}

impl TwoLevelResult {
    /// GOF of collected histograms; `nulls` holds one null per channel or a
    /// single null shared by all channels.
    pub fn evaluate(
        hists: &PValueHistograms,
        nulls: &[SecondLevelNull],
        significance: f64,
        source: Derivation,
    ) -> Result<Self> {
        let channels = hists.histograms.len();
        if nulls.len() != 1 && nulls.len() != channels {
            return Err(Error::Domain(format!(
                "{} nulls for {channels} channels",
                nulls.len()
            )));
        }
        let labels = hists.test.channel_labels();
        let channels = hists
            .histograms
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let null = &nulls[if nulls.len() == 1 { 0 } else { i }];
                null.validate()?;
                let (chi2, p_second) = gof_chi2(h, null)?;
                Ok(ChannelResult {
                    label: labels[i].clone(),
                    null: null.clone(),
                    histogram: h.clone(),
                    chi2,
                    p_second,
                    rejected: p_second < significance,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            test: hists.test,
            n: hists.n,
            big_n: hists.runs,
            nu: hists.nu,
            significance,
            discarded: hists.discarded,
            channels,
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialises")
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{}  n = {}  N = {}  discarded = {}  seed {}\n",
            self.test,
            group_thousands(self.n as u64),
            group_thousands(self.big_n),
            self.discarded,
            self.source.seed
        );
        s.push_str(&format!(
            "{:<14}{:>8}{:>16}{:>16}  histogram\n",
            "channel", "null", "chi2", "p_second"
        ));
        for c in &self.channels {
            let hist: Vec<String> = c.histogram.iter().map(u64::to_string).collect();
            s.push_str(&format!(
                "{:<14}{:>8}{:>16.6}{:>16.6e}{} {}\n",
                c.label,
                c.null.kind.to_string(),
                c.chi2,
                c.p_second,
                if c.rejected { " *" } else { "  " },
                hist.join(" ")
            ));
        }
        s
    }
}

/// Full two-level run of N results under the given nulls.
pub fn run_two_level(
    source: &mut BitSource,
    test: OneLevelTest,
    n: usize,
    big_n: u64,
    nulls: &[SecondLevelNull],
) -> Result<TwoLevelResult> {
    let nu = nulls
        .first()
        .ok_or_else(|| Error::Domain("no null given".into()))?
        .nu();
    if nulls.iter().any(|x| x.nu() != nu) {
        return Err(Error::Domain("nulls disagree on nu".into()));
    }
    let derivation = source.derivation().clone();
    let hists = collect_histograms(source, test, n, nu, &[big_n])?;
    TwoLevelResult::evaluate(&hists[0], nulls, DEFAULT_SIGNIFICANCE, derivation)
}
