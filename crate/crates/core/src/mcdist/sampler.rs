use rand_core::RngCore;
use rand_distr::{Binomial, Distribution};

use crate::bitgen::BitSource;
use crate::error::{Error, Result};
use crate::numerics::{binomial_pmf, chi2_sf_unchecked};
use crate::onelevel::{block_frequency_p_value, chi2_class_statistic, OneLevelTest, TestSpec};

/// Something that turns random bits into one approximated p-value.
pub trait Sampler: Sync {
    type Scratch: Send;
    fn scratch(&self) -> Self::Scratch;
    fn sample_p(&self, src: &mut BitSource, scratch: &mut Self::Scratch) -> Result<f64>;
}

/// Suffix sums Σ_{j≥i} probs_j, used as the conditioning mass.
fn tails(probs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; probs.len()];
    let mut acc = 0.0;
    for i in (0..probs.len()).rev() {
        acc += probs[i];
        out[i] = acc;
    }
    out
}

fn multinomial_into<R: RngCore + ?Sized>(n: u64, probs: &[f64], tails: &[f64], rng: &mut R, out: &mut [u64]) {
    let mut left = n;
    let last = probs.len() - 1;
    for i in 0..last {
        if left == 0 {
            out[i] = 0;
            continue;
        }
        let p = (probs[i] / tails[i]).clamp(0.0, 1.0);
        let x = Binomial::new(left, p).expect("p in [0, 1]").sample(rng);
        out[i] = x;
        left -= x;
    }
    out[last] = left;
}

/// One draw from Multi(n; probs) by sequential conditional binomials.
pub fn multinomial_sample<R: RngCore + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    let total: f64 = probs.iter().sum();
    if probs.is_empty() || (total - 1.0).abs() > 1e-12 || probs.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("not a probability vector: {probs:?}")));
    }
    let mut out = vec![0; probs.len()];
    multinomial_into(n, probs, &tails(probs), rng, &mut out);
    Ok(out)
}

pub(super) struct ClassSampler<'a> {
    spec: &'a TestSpec,
    tails: Vec<f64>,
}

impl<'a> ClassSampler<'a> {
    pub fn new(spec: &'a TestSpec) -> Self {
        Self {
            spec,
            tails: tails(&spec.probs),
        }
    }
}

impl Sampler for ClassSampler<'_> {
    type Scratch = Vec<u64>;

    fn scratch(&self) -> Vec<u64> {
        vec![0; self.spec.probs.len()]
    }

    fn sample_p(&self, src: &mut BitSource, x: &mut Vec<u64>) -> Result<f64> {
        multinomial_into(self.spec.n_b, &self.spec.probs, &self.tails, src, x);
        Ok(chi2_sf_unchecked(self.spec.df, chi2_class_statistic(x, self.spec)))
    }
}

/// Block Frequency samples. The statistic depends only on how many of the
/// n_b blocks have each one-count c ∈ 0..=m, so a sample is one draw of
/// that histogram from Multi(n_b; Binom(m, ½) pmf).
pub struct BlockFrequencySampler {
    m: u64,
    n_b: u64,
    probs: Vec<f64>,
    tails: Vec<f64>,
    /// (2c − m)² per one-count c.
    weights: Vec<u128>,
}

impl BlockFrequencySampler {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if m == 0 || n < m {
            return Err(Error::Domain(format!("need 1 ≤ m ≤ n, got m={m}, n={n}")));
        }
        let mut probs: Vec<f64> = (0..=m).map(|c| binomial_pmf(c, m, 0.5)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let weights = (0..=m)
            .map(|c| {
                let d = (2 * c as i128 - m as i128).unsigned_abs();
                d * d
            })
            .collect();
        Ok(Self {
            m,
            n_b: n / m,
            tails: tails(&probs),
            probs,
            weights,
        })
    }

    pub fn blocks(&self) -> u64 {
        self.n_b
    }
}

impl Sampler for BlockFrequencySampler {
    type Scratch = Vec<u64>;

    fn scratch(&self) -> Vec<u64> {
        vec![0; self.probs.len()]
    }

    fn sample_p(&self, src: &mut BitSource, hist: &mut Vec<u64>) -> Result<f64> {
        multinomial_into(self.n_b, &self.probs, &self.tails, src, hist);
        let s: u128 = hist.iter().zip(&self.weights).map(|(&h, &w)| h as u128 * w).sum();
        Ok(block_frequency_p_value(s as f64 / self.m as f64, self.n_b))
    }
}

pub(super) struct SequenceSampler {
    pub test: OneLevelTest,
    pub n: usize,
}

impl Sampler for SequenceSampler {
    type Scratch = ();

    fn scratch(&self) {}

    fn sample_p(&self, src: &mut BitSource, _: &mut ()) -> Result<f64> {
        let block = src.next_block(self.n)?;
        let ps = self.test.evaluate(&block)?.ok_or_else(|| {
            Error::Unsupported(format!("{} produced no p-value", self.test))
        })?;
        Ok(ps[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitgen::SourceKind;

    #[test]
    fn degenerate_probabilities() {
        let mut src = BitSource::from_u64(SourceKind::Mt19937, 1).unwrap();
        assert_eq!(multinomial_sample(7, &[1.0, 0.0, 0.0], &mut src).unwrap(), vec![7, 0, 0]);
        assert_eq!(multinomial_sample(7, &[0.0, 0.0, 1.0], &mut src).unwrap(), vec![0, 0, 7]);
        assert!(multinomial_sample(7, &[0.5, 0.6], &mut src).is_err());
    }

    #[test]
    fn block_frequency_statistic_matches_direct_formula() {
        let s = BlockFrequencySampler::new(8, 4).unwrap();
        // blocks with one-counts (4, 0): T = 8
        let mut hist = vec![0u64; 5];
        hist[4] = 1;
        hist[0] = 1;
        let t: u128 = hist.iter().zip(&s.weights).map(|(&h, &w)| h as u128 * w).sum();
        assert_eq!(t as f64 / 4.0, 8.0);
    }
}
