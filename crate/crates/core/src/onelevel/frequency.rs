use crate::bitgen::BitBlock;
use crate::error::{Error, Result};
use crate::numerics::erfc;
use crate::numerics::igamc_unchecked;
#[cfg(test)]
use crate::numerics::igamc;

/// erfc(|2·ones − n| / √(2n)).
pub fn frequency_p_value(ones: u64, n: u64) -> f64 {
    let s = (2 * ones as i64 - n as i64).unsigned_abs() as f64;
    erfc(s / (2.0 * n as f64).sqrt())
}

/// Monobit test.
pub fn frequency_test(block: &BitBlock) -> Result<f64> {
    if block.len() < 100 {
        return Err(Error::BlockTooShort {
            needed: 100,
            got: block.len(),
        });
    }
    Ok(frequency_p_value(block.count_ones(), block.len() as u64))
}

/// Ones in each of the ⌊n/m⌋ m-bit blocks.
pub fn block_ones(block: &BitBlock, m: usize) -> Vec<u64> {
    let n_b = block.len() / m;
    if m == 128 {
        return block
            .words()
            .chunks_exact(2)
            .take(n_b)
            .map(|c| (c[0].count_ones() + c[1].count_ones()) as u64)
            .collect();
    }
    (0..n_b).map(|i| block.count_ones_range(i * m, m)).collect()
}

/// T = 4m Σ(X_i/m − ½)², evaluated exactly as Σ(2X_i − m)²/m.
pub fn block_frequency_statistic(ones: &[u64], m: u64) -> f64 {
    let s: u128 = ones
        .iter()
        .map(|&x| {
            let d = (2 * x as i128 - m as i128).unsigned_abs();
            d * d
        })
        .sum();
    s as f64 / m as f64
}

pub fn block_frequency_p_value(t: f64, n_b: u64) -> f64 {
    igamc_unchecked(n_b as f64 / 2.0, t / 2.0)
}

pub fn block_frequency_test(block: &BitBlock, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("block size must be positive".into()));
    }
    let n_b = block.len() / m;
    if n_b == 0 {
        return Err(Error::BlockTooShort {
            needed: m,
            got: block.len(),
        });
    }
    let ones = block_ones(block, m);
    let t = block_frequency_statistic(&ones, m as u64);
    Ok(block_frequency_p_value(t, n_b as u64))
}
