use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A fixed-length bit string packed MSB-first into 64-bit words.
///
/// Bit 0 is the most significant bit of `words[0]`. Bits past `len` in the
/// final word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitBlock {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn top_mask(k: u32) -> u64 {
    match k {
        0 => 0,
        64 => u64::MAX,
        _ => !(u64::MAX >> k),
    }
}

impl BitBlock {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Wraps packed words, clearing anything past `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        assert!(words.len() * 64 >= len, "{} words cannot hold {len} bits", words.len());
        words.truncate(len.div_ceil(64));
        let tail = (len % 64) as u32;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= top_mask(tail);
            }
        }
        Self { words, len }
    }

    /// Empties the block and hands back its word buffer for reuse.
    pub(crate) fn take_words(&mut self) -> Vec<u64> {
        self.len = 0;
        std::mem::take(&mut self.words)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1u64 << (63 - len % 64);
            }
            len += 1;
        }
        Self { words, len }
    }

    /// Raw bytes, MSB-first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let words = bytes
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_be_bytes(buf)
            })
            .collect();
        Self {
            words,
            len: bytes.len() * 8,
        }
    }

    /// Packs the bits into bytes, MSB-first; the last byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_be_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// `k ≤ 64` bits starting at `start`, left-aligned in the result.
    #[inline]
    pub fn extract(&self, start: usize, k: u32) -> u64 {
        debug_assert!(k <= 64 && start + k as usize <= self.len);
        if k == 0 {
            return 0;
        }
        let (w, off) = (start / 64, (start % 64) as u32);
        let mut v = self.words[w] << off;
        if off != 0 && off + k > 64 {
            v |= self.words[w + 1] >> (64 - off);
        }
        v & top_mask(k)
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of ones in bits `start..start + len`.
    pub fn count_ones_range(&self, start: usize, len: usize) -> u64 {
        assert!(start + len <= self.len);
        let mut total = 0u64;
        let mut pos = start;
        let end = start + len;
        while pos < end {
            let k = (end - pos).min(64) as u32;
            total += self.extract(pos, k).count_ones() as u64;
            pos += k as usize;
        }
        total
    }

    /// Copy of bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitBlock {
        assert!(start + len <= self.len, "slice {start}+{len} exceeds {}", self.len);
        let mut words = Vec::with_capacity(len.div_ceil(64));
        let mut pos = start;
        let end = start + len;
        while pos < end {
            let k = (end - pos).min(64) as u32;
            words.push(self.extract(pos, k));
            pos += k as usize;
        }
        BitBlock { words, len }
    }

    pub fn concat(&self, other: &BitBlock) -> BitBlock {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn extend(&mut self, other: &BitBlock) {
        let mut pos = 0;
        while pos < other.len {
            let k = (other.len - pos).min(64) as u32;
            self.push_bits(other.extract(pos, k), k);
            pos += k as usize;
        }
    }

    /// Appends the top `k` bits of `v`.
    pub fn push_bits(&mut self, v: u64, k: u32) {
        if k == 0 {
            return;
        }
        let v = v & top_mask(k);
        let off = (self.len % 64) as u32;
        if off == 0 {
            self.words.push(v);
        } else {
            *self.words.last_mut().unwrap() |= v >> off;
            if off + k > 64 {
                self.words.push(v << (64 - off));
            }
        }
        self.len += k as usize;
    }
}

impl FromStr for BitBlock {
    type Err = Error;

    /// Parses '0'/'1' characters, ignoring whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(Error::Domain(format!("unexpected character {c:?} in bit string"))),
            }
        }
        Ok(Self::from_bits(bits))
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitBlock({self})")
        } else {
            write!(f, "BitBlock(len={})", self.len)
        }
    }
}
