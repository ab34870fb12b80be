use super::spec::{chi2_class_statistic, TestSpec};
use crate::bitgen::BitBlock;
use crate::error::{Error, Result};
use crate::numerics::chi2_sf_unchecked;

/// NIST's rounded class probabilities for the linear complexity test.
pub const LINEAR_CLASS_PROBS: [f64; 7] = [0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833];

/// Bit vector over GF(2) with bit i at word i/64, position i%64.
#[derive(Clone)]
struct Poly(Vec<u64>);

impl Poly {
    fn xor_shifted(&mut self, other: &Poly, shift: usize, upto_bits: usize) {
        let (ws, bs) = (shift / 64, (shift % 64) as u32);
        let limit = upto_bits.div_ceil(64).min(self.0.len());
        for i in (ws..limit).rev() {
            let src = i - ws;
            let mut v = other.0.get(src).copied().unwrap_or(0) << bs;
            if bs != 0 && src > 0 {
                v |= other.0[src - 1] >> (64 - bs);
            }
            self.0[i] ^= v;
        }
    }
}

/// Linear complexity of bits `start..start + len`: the length of the
/// shortest LFSR generating them.
pub fn linear_complexity(block: &BitBlock, start: usize, len: usize) -> usize {
    let words = len.div_ceil(64) + 1;
    let mut c = Poly(vec![0; words]);
    let mut b = Poly(vec![0; words]);
    c.0[0] = 1;
    b.0[0] = 1;
    // window bit i holds s_{N−i}
    let mut window = vec![0u64; words];
    let mut l = 0usize;
    let mut last: isize = -1;
    for n in 0..len {
        let used = (n + 1).div_ceil(64);
        let mut carry = block.bit(start + n) as u64;
        for w in window.iter_mut().take(used) {
            let next = *w >> 63;
            *w = (*w << 1) | carry;
            carry = next;
        }
        // discrepancy = parity of Σ_{i≤L} c_i s_{N−i}
        let span = (l + 1).div_ceil(64);
        let mut acc = 0u64;
        for i in 0..span {
            acc ^= c.0[i] & window[i];
        }
        if acc.count_ones() & 1 == 1 {
            let shift = (n as isize - last) as usize;
            if 2 * l <= n {
                let t = c.clone();
                c.xor_shifted(&b, shift, len + 1);
                l = n + 1 - l;
                last = n as isize;
                b = t;
            } else {
                c.xor_shifted(&b, shift, len + 1);
            }
        }
    }
    l
}

pub fn berlekamp_massey(block: &BitBlock) -> usize {
    linear_complexity(block, 0, block.len())
}

/// μ = m/2 + (9 + (−1)^{m+1})/36 − (m/3 + 2/9)/2^m.
pub fn linear_mean(m: u64) -> f64 {
    let mf = m as f64;
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    mf / 2.0 + (9.0 + sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powf(mf)
}

/// Class of T = (−1)^m (L − μ) + 2/9 under NIST's thresholds ±2.5, ±1.5, ±0.5.
pub fn linear_class(l: usize, m: u64) -> usize {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let t = sign * (l as f64 - linear_mean(m)) + 2.0 / 9.0;
    if t <= -2.5 {
        0
    } else if t <= -1.5 {
        1
    } else if t <= -0.5 {
        2
    } else if t <= 0.5 {
        3
    } else if t <= 1.5 {
        4
    } else if t <= 2.5 {
        5
    } else {
        6
    }
}

pub fn linear_spec(n: u64, m: u64) -> Result<TestSpec> {
    if !(500..=5000).contains(&m) {
        return Err(Error::Unsupported(format!(
            "linear complexity block size {m} outside 500..=5000"
        )));
    }
    TestSpec::new(format!("linear-complexity(m={m})"), m, LINEAR_CLASS_PROBS.to_vec(), n / m)
}

pub fn linear_counts(block: &BitBlock, m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 7];
    for i in 0..block.len() / m {
        counts[linear_class(linear_complexity(block, i * m, m), m as u64)] += 1;
    }
    counts
}

pub fn linear_complexity_test(block: &BitBlock, m: usize) -> Result<f64> {
    let spec = linear_spec(block.len() as u64, m as u64)?;
    let counts = linear_counts(block, m);
    Ok(chi2_sf_unchecked(spec.df, chi2_class_statistic(&counts, &spec)))
}
