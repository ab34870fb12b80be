use super::runs::for_each_run;
use super::spec::{chi2_class_statistic, TestSpec};
use crate::bitgen::BitBlock;
use crate::error::Result;
use crate::numerics::chi2_sf_unchecked;

pub const OVERLAP_BLOCK: usize = 1032;
pub const OVERLAP_TEMPLATE_LEN: u32 = 9;
pub const OVERLAP_K: usize = 5;

/// NIST's class probabilities for M = 1032, m = 9, K = 5. The last entry is
/// the complement of the first five so the vector sums to one.
pub fn overlap_class_probs() -> Vec<f64> {
    let head = [0.364091, 0.185659, 0.139381, 0.100571, 0.070432];
    let mut p = head.to_vec();
    p.push(1.0 - head.iter().sum::<f64>());
    p
}

pub fn overlap_spec(n: u64) -> Result<TestSpec> {
    TestSpec::new(
        "overlapping-template",
        OVERLAP_BLOCK as u64,
        overlap_class_probs(),
        n / OVERLAP_BLOCK as u64,
    )
}

/// Overlapping occurrences of nine consecutive ones in bits
/// `start..start + len`: a run of r ones holds max(0, r − 8) of them.
pub fn template_matches(block: &BitBlock, start: usize, len: usize) -> u64 {
    let mut total = 0u64;
    for_each_run(block, start, len, |r| {
        total += r.saturating_sub(OVERLAP_TEMPLATE_LEN - 1) as u64
    });
    total
}

pub fn overlap_counts(block: &BitBlock) -> Vec<u64> {
    let mut counts = vec![0u64; OVERLAP_K + 1];
    for i in 0..block.len() / OVERLAP_BLOCK {
        let v = template_matches(block, i * OVERLAP_BLOCK, OVERLAP_BLOCK);
        counts[(v as usize).min(OVERLAP_K)] += 1;
    }
    counts
}

pub fn overlapping_template_test(block: &BitBlock) -> Result<f64> {
    let spec = overlap_spec(block.len() as u64)?;
    let counts = overlap_counts(block);
    Ok(chi2_sf_unchecked(spec.df, chi2_class_statistic(&counts, &spec)))
}
