use std::sync::OnceLock;

use super::runs::longest_run;
use super::spec::{chi2_class_statistic, TestSpec};
use crate::bitgen::BitBlock;
use crate::error::{Error, Result};
use crate::numerics::{chi2_sf_unchecked, CompensatedSum};

/// Class boundaries b_0 < … < b_last for a block size: classes are
/// {≤ b_0}, {b_0 + 1 ..= b_1}, …, {> b_last}.
pub fn longest_run_boundaries(m: u64) -> Result<&'static [u32]> {
    match m {
        8 => Ok(&[1, 2, 3]),
        128 => Ok(&[4, 5, 6, 7, 8]),
        10_000 => Ok(&[10, 11, 12, 13, 14, 15]),
        _ => Err(Error::Unsupported(format!(
            "no longest-run class layout for block size {m} (use 8, 128 or 10000)"
        ))),
    }
}

/// P(longest run of ones ≤ t) in m fair bits.
///
/// With P_j that probability for length j, P_j = 1 for j ≤ t and
/// P_j = Σ_{i=1}^{t+1} P_{j−i} / 2^i otherwise (condition on the position of
/// the first zero).
pub fn prob_longest_at_most(m: u64, t: u32) -> f64 {
    let m = m as usize;
    let t = t as usize;
    if m <= t {
        return 1.0;
    }
    let weights: Vec<f64> = (1..=t + 1).map(|i| 0.5f64.powi(i as i32)).collect();
    let mut p = vec![1.0f64; m + 1];
    for j in t + 1..=m {
        let mut acc = CompensatedSum::new();
        for (i, w) in weights.iter().enumerate() {
            acc.add(p[j - i - 1] * w);
        }
        p[j] = acc.value();
    }
    p[m]
}

/// Exact class probabilities for the longest run of ones in m fair bits.
pub fn longest_run_class_probs(m: u64, boundaries: &[u32]) -> Vec<f64> {
    let cdf: Vec<f64> = boundaries.iter().map(|&b| prob_longest_at_most(m, b)).collect();
    let mut out = Vec::with_capacity(boundaries.len() + 1);
    out.push(cdf[0]);
    for w in cdf.windows(2) {
        out.push(w[1] - w[0]);
    }
    out.push(1.0 - cdf[cdf.len() - 1]);
    out
}

/// Normalised class probabilities, computed once per block size.
fn cached_probs(m: u64) -> Result<Vec<f64>> {
    static CACHE: [OnceLock<Vec<f64>>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let bounds = longest_run_boundaries(m)?;
    let slot = match m {
        8 => 0,
        128 => 1,
        _ => 2,
    };
    Ok(CACHE[slot]
        .get_or_init(|| {
            let probs = longest_run_class_probs(m, bounds);
            // Absorb the rounding residue so the vector sums to one.
            let total: f64 = probs.iter().sum();
            probs.iter().map(|p| p / total).collect()
        })
        .clone())
}

pub fn longest_run_spec(n: u64, m: u64) -> Result<TestSpec> {
    TestSpec::new(format!("longest-run(m={m})"), m, cached_probs(m)?, n / m)
}

pub fn longest_run_class(longest: u32, boundaries: &[u32]) -> usize {
    boundaries.iter().position(|&b| longest <= b).unwrap_or(boundaries.len())
}

pub fn longest_run_counts(block: &BitBlock, m: usize) -> Result<Vec<u64>> {
    let bounds = longest_run_boundaries(m as u64)?;
    let mut counts = vec![0u64; bounds.len() + 1];
    for i in 0..block.len() / m {
        counts[longest_run_class(longest_run(block, i * m, m), bounds)] += 1;
    }
    Ok(counts)
}

pub fn longest_run_test(block: &BitBlock, m: usize) -> Result<f64> {
    let spec = longest_run_spec(block.len() as u64, m as u64)?;
    let counts = longest_run_counts(block, m)?;
    Ok(chi2_sf_unchecked(spec.df, chi2_class_statistic(&counts, &spec)))
}
