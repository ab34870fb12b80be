use crate::bitgen::BitBlock;

/// Calls `f` with the length of every maximal run of ones inside bits
/// `start..start + len`. Runs touching the range ends are cut there.
pub fn for_each_run(block: &BitBlock, start: usize, len: usize, mut f: impl FnMut(u32)) {
    let mut run = 0u32;
    let mut pos = start;
    let end = start + len;
    while pos < end {
        let k = (end - pos).min(64) as u32;
        let mut w = block.extract(pos, k);
        let mut left = k;
        while left > 0 {
            let ones = (!w).leading_zeros().min(left);
            run += ones;
            left -= ones;
            if left == 0 {
                break;
            }
            w = if ones == 64 { 0 } else { w << ones };
            if run > 0 {
                f(run);
                run = 0;
            }
            let zeros = w.leading_zeros().min(left);
            left -= zeros;
            w = if zeros == 64 { 0 } else { w << zeros };
        }
        pos += k as usize;
    }
    if run > 0 {
        f(run);
    }
}

/// Longest run of ones in bits `start..start + len`.
pub fn longest_run(block: &BitBlock, start: usize, len: usize) -> u32 {
    let (mut best, mut carry) = (0u32, 0u32);
    let end = start + len;
    let mut pos = start;
    while pos < end {
        let k = (end - pos).min(64);
        // A short final word is zero-padded, which ends any run correctly.
        let w = block.extract(pos, k as u32);
        pos += k;
        if w == u64::MAX {
            carry += 64;
            continue;
        }
        best = best.max(carry + w.leading_ones());
        let mut x = w;
        let mut inner = 0;
        while x != 0 {
            x &= x << 1;
            inner += 1;
        }
        best = best.max(inner);
        carry = w.trailing_ones();
    }
    best.max(carry)
}
