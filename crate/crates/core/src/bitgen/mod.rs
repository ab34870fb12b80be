//! Deterministic bit sources.
//!
//! Every generator produces 32-bit words which are consumed most
//! significant bit first. Raw file bytes are read the same way.

mod block;
mod file;
mod mt;
mod sha1g;
mod well;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use block::BitBlock;
pub use file::{decode, read_bits, write_bits, FileFormat};
pub use mt::Mt19937;
pub use sha1g::{sha1_compress, Sha1Generator};
pub use well::Well19937a;

use crate::error::{Error, Result};

const DERIVATION_TAG: &[u8] = b"twolevel/stream";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    #[serde(rename = "MT19937")]
    Mt19937,
    #[serde(rename = "SHA1G")]
    Sha1g,
    #[serde(rename = "WELL")]
    Well,
    #[serde(rename = "FILE")]
    File,
    #[serde(rename = "SPLITSTREAM")]
    SplitStream,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Mt19937 => "MT19937",
            SourceKind::Sha1g => "SHA1G",
            SourceKind::Well => "WELL",
            SourceKind::File => "FILE",
            SourceKind::SplitStream => "SPLITSTREAM",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "MT19937" | "MT" => Ok(SourceKind::Mt19937),
            "SHA1G" | "SHA1" => Ok(SourceKind::Sha1g),
            "WELL" | "WELL19937A" => Ok(SourceKind::Well),
            "FILE" => Ok(SourceKind::File),
            "SPLITSTREAM" | "CHACHA" => Ok(SourceKind::SplitStream),
            _ => Err(Error::Unsupported(format!("unknown source kind {s:?}"))),
        }
    }
}

/// How a source's seed was obtained, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub kind: SourceKind,
    /// Hex of the seed the user supplied (or the file label).
    pub root_seed: String,
    /// Stream indices applied, outermost first.
    pub path: Vec<u64>,
    /// Hex of the seed actually used by the generator.
    pub seed: String,
}

#[derive(Clone)]
enum Engine {
    Mt(Box<Mt19937>),
    Well(Box<Well19937a>),
    Sha1(Sha1Generator),
    Chacha(Box<ChaCha8Rng>),
    File {
        bits: Arc<BitBlock>,
        start: usize,
        end: usize,
    },
}

impl Engine {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        match self {
            Engine::Mt(g) => g.next_u32(),
            Engine::Well(g) => g.next_u32(),
            Engine::Sha1(g) => g.next_u32(),
            Engine::Chacha(g) => g.next_u32(),
            Engine::File { .. } => unreachable!("file sources are read directly"),
        }
    }

    /// Fills `out` with words made of two consecutive outputs, high first.
    fn fill_words(&mut self, out: &mut [u64]) {
        fn pairs(out: &mut [u64], mut f: impl FnMut() -> u32) {
            for w in out {
                let hi = f() as u64;
                *w = (hi << 32) | f() as u64;
            }
        }
        match self {
            Engine::Mt(g) => pairs(out, || g.next_u32()),
            Engine::Well(g) => pairs(out, || g.next_u32()),
            Engine::Sha1(g) => pairs(out, || g.next_u32()),
            Engine::Chacha(g) => pairs(out, || g.next_u32()),
            Engine::File { .. } => unreachable!("file sources are read directly"),
        }
    }
}

/// A stateful, single-owner bit stream.
#[derive(Clone)]
pub struct BitSource {
    kind: SourceKind,
    seed: Vec<u8>,
    position: u64,
    derivation: Derivation,
    engine: Engine,
    // Unconsumed generator bits, left-aligned.
    buf: u64,
    buf_len: u32,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Seed bytes as big-endian 32-bit words; a short final chunk is read as a
/// big-endian integer of its own length.
fn key_words(seed: &[u8]) -> Vec<u32> {
    if seed.is_empty() {
        return vec![0];
    }
    seed.chunks(4)
        .map(|c| c.iter().fold(0u32, |acc, &b| (acc << 8) | b as u32))
        .collect()
}

/// Seeds of at most 4 bytes go through `init_genrand`, longer ones through
/// `init_by_array`.
fn mt_from_seed(seed: &[u8]) -> Mt19937 {
    let words = key_words(seed);
    if seed.len() <= 4 {
        Mt19937::new(words[0])
    } else {
        Mt19937::from_key(&words)
    }
}

/// Keyed hash of (seed, index) used to derive independent streams.
pub fn derive_seed(seed: &[u8], index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DERIVATION_TAG);
    h.update((seed.len() as u64).to_be_bytes());
    h.update(seed);
    h.update(index.to_be_bytes());
    h.finalize().into()
}

impl BitSource {
    /// A generator source. Use [`BitSource::from_bits`] or
    /// [`BitSource::from_file`] for FILE sources.
    pub fn new(kind: SourceKind, seed: &[u8]) -> Result<Self> {
        let engine = Self::engine(kind, seed)?;
        Ok(Self {
            kind,
            seed: seed.to_vec(),
            position: 0,
            derivation: Derivation {
                kind,
                root_seed: hex(seed),
                path: Vec::new(),
                seed: hex(seed),
            },
            engine,
            buf: 0,
            buf_len: 0,
        })
    }

    /// Integer seed, encoded big-endian in 4 bytes when it fits and 8
    /// otherwise. MT19937 with a 4-byte seed uses `init_genrand`, so
    /// `from_u64(Mt19937, 5489)` is the reference default stream.
    pub fn from_u64(kind: SourceKind, seed: u64) -> Result<Self> {
        match u32::try_from(seed) {
            Ok(s) => Self::new(kind, &s.to_be_bytes()),
            Err(_) => Self::new(kind, &seed.to_be_bytes()),
        }
    }

    /// The source used for experiment seed `seed`: the integer seed passed
    /// through the stream derivation at index 0.
    pub fn experiment(kind: SourceKind, seed: u64) -> Result<Self> {
        Ok(Self::from_u64(kind, seed)?.derive(0))
    }

    pub fn from_bits(bits: BitBlock, label: &str) -> Self {
        let end = bits.len();
        Self {
            kind: SourceKind::File,
            seed: label.as_bytes().to_vec(),
            position: 0,
            derivation: Derivation {
                kind: SourceKind::File,
                root_seed: label.to_string(),
                path: Vec::new(),
                seed: label.to_string(),
            },
            engine: Engine::File {
                bits: Arc::new(bits),
                start: 0,
                end,
            },
            buf: 0,
            buf_len: 0,
        }
    }

    pub fn from_file(path: &Path, format: FileFormat) -> Result<Self> {
        let bits = read_bits(path, format)?;
        Ok(Self::from_bits(bits, &path.display().to_string()))
    }

    fn engine(kind: SourceKind, seed: &[u8]) -> Result<Engine> {
        Ok(match kind {
            SourceKind::Mt19937 => Engine::Mt(Box::new(mt_from_seed(seed))),
            SourceKind::Well => {
                Engine::Well(Box::new(Well19937a::from_state(*mt_from_seed(seed).state())))
            }
            SourceKind::Sha1g => Engine::Sha1(Sha1Generator::from_seed(seed)),
            SourceKind::SplitStream => {
                let key: [u8; 32] = Sha256::digest(seed).into();
                Engine::Chacha(Box::new(ChaCha8Rng::from_seed(key)))
            }
            SourceKind::File => {
                return Err(Error::Unsupported(
                    "FILE sources are opened from a file, not a seed".into(),
                ))
            }
        })
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    /// Bits consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    /// Bits left, or `None` for unbounded generators.
    pub fn remaining(&self) -> Option<u64> {
        match &self.engine {
            Engine::File { start, end, .. } => Some((end - start) as u64 - self.position),
            _ => None,
        }
    }

    /// Stream `index` derived from this source's seed.
    ///
    /// For FILE sources there is nothing to rehash, so this is the source
    /// itself restarted at its first bit.
    pub fn derive(&self, index: u64) -> BitSource {
        match &self.engine {
            Engine::File { bits, start, end } => {
                let mut s = self.clone();
                s.engine = Engine::File {
                    bits: bits.clone(),
                    start: *start,
                    end: *end,
                };
                s.position = 0;
                s.derivation.path.push(index);
                s
            }
            _ => {
                let seed = derive_seed(&self.seed, index);
                let mut s = BitSource::new(self.kind, &seed).expect("generator kinds accept any seed");
                s.derivation = Derivation {
                    kind: self.kind,
                    root_seed: self.derivation.root_seed.clone(),
                    path: self.derivation.path.iter().copied().chain([index]).collect(),
                    seed: hex(&seed),
                };
                s
            }
        }
    }

    /// `count` independent sources. Generator streams are derived by hashing
    /// (seed, index); a FILE source is split into `count` contiguous,
    /// equal-length segments of its unread bits.
    pub fn jump_streams(&self, count: usize) -> Vec<BitSource> {
        assert!(count >= 1, "jump_streams needs count >= 1");
        match &self.engine {
            Engine::File { bits, start, end } => {
                let from = start + self.position as usize;
                let seg = (end - from) / count;
                (0..count)
                    .map(|i| {
                        let mut s = self.clone();
                        s.engine = Engine::File {
                            bits: bits.clone(),
                            start: from + i * seg,
                            end: from + (i + 1) * seg,
                        };
                        s.position = 0;
                        s.derivation.path.push(i as u64);
                        s
                    })
                    .collect()
            }
            _ => (0..count as u64).map(|i| self.derive(i)).collect(),
        }
    }

    /// The next `n` bits.
    pub fn next_block(&mut self, n: usize) -> Result<BitBlock> {
        let mut out = BitBlock::zeros(0);
        self.next_block_into(&mut out, n)?;
        Ok(out)
    }

    /// Like [`next_block`](Self::next_block), refilling `out` in place so
    /// its allocation is reused.
    pub fn next_block_into(&mut self, out: &mut BitBlock, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain("block length must be positive".into()));
        }
        if let Engine::File { bits, start, .. } = &self.engine {
            let remaining = self.remaining().unwrap();
            if (n as u64) > remaining {
                return Err(Error::SourceExhausted {
                    requested: n as u64,
                    remaining,
                });
            }
            *out = bits.slice(start + self.position as usize, n);
            self.position += n as u64;
            return Ok(());
        }
        let mut words = out.take_words();
        words.clear();
        words.reserve(n.div_ceil(64));
        let mut left = n;
        if self.buf_len == 0 {
            words.resize(n / 64, 0);
            self.engine.fill_words(&mut words);
            self.position += (n - n % 64) as u64;
            left = n % 64;
        }
        while left > 0 {
            let k = left.min(64) as u32;
            words.push(self.take_bits(k));
            left -= k as usize;
        }
        *out = BitBlock::from_words(words, n);
        Ok(())
    }

    /// Skips `n` bits.
    pub fn skip(&mut self, n: u64) -> Result<()> {
        if let Some(remaining) = self.remaining() {
            if n > remaining {
                return Err(Error::SourceExhausted {
                    requested: n,
                    remaining,
                });
            }
            self.position += n;
            return Ok(());
        }
        let mut left = n;
        while left > 0 {
            let k = left.min(64) as u32;
            self.take_bits(k);
            left -= k as u64;
        }
        Ok(())
    }

    /// `k` (1..=64) generator bits, left-aligned.
    #[inline]
    fn take_bits(&mut self, k: u32) -> u64 {
        debug_assert!((1..=64).contains(&k));
        self.position += k as u64;
        if let Engine::File { bits, start, .. } = &self.engine {
            let at = start + (self.position - k as u64) as usize;
            return bits.extract(at, k);
        }
        if self.buf_len >= k {
            let out = if k == 64 { self.buf } else { self.buf & !(u64::MAX >> k) };
            self.buf = if k == 64 { 0 } else { self.buf << k };
            self.buf_len -= k;
            return out;
        }
        let have = self.buf_len;
        let hi = self.engine.next_u32() as u64;
        let lo = self.engine.next_u32() as u64;
        let fresh = (hi << 32) | lo;
        let need = k - have;
        let joined = if have == 0 { fresh } else { self.buf | (fresh >> have) };
        let out = if k == 64 { joined } else { joined & !(u64::MAX >> k) };
        self.buf = if need == 64 { 0 } else { fresh << need };
        self.buf_len = 64 - need;
        out
    }

    fn check_file_bits(&self, k: u64) {
        if let Some(remaining) = self.remaining() {
            assert!(
                remaining >= k,
                "FILE source exhausted: {k} bits requested, {remaining} remaining"
            );
        }
    }
}

impl fmt::Debug for BitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitSource")
            .field("kind", &self.kind)
            .field("seed", &hex(&self.seed))
            .field("position", &self.position)
            .finish()
    }
}

/// Generic RNG view of the bit stream, for samplers. Panics if a FILE source
/// runs out.
impl RngCore for BitSource {
    fn next_u32(&mut self) -> u32 {
        self.check_file_bits(32);
        (self.take_bits(32) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.check_file_bits(64);
        self.take_bits(64)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.check_file_bits(8 * dest.len() as u64);
        for chunk in dest.chunks_mut(8) {
            let v = self.take_bits(8 * chunk.len() as u32);
            chunk.copy_from_slice(&v.to_be_bytes()[..chunk.len()]);
        }
    }
}
