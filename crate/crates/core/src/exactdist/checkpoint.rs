//! Resumable enumeration state.
//!
//! Layout, little-endian: magic `TLCK`, u32 version, 32-byte spec hash,
//! u64 next unit, u128 compositions processed, u32 bin count, then
//! (sum, compensation) as two f64 per bin.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::onelevel::TestSpec;

const MAGIC: &[u8; 4] = b"TLCK";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub spec_hash: [u8; 32],
    pub next_unit: u64,
    pub compositions: u128,
    pub bins: Vec<CompensatedSum>,
}

pub fn spec_hash(spec: &TestSpec, nu: u32) -> [u8; 32] {
    let bytes = serde_json::to_vec(&(spec, nu)).expect("spec serializes");
    Sha256::digest(bytes).into()
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(80 + 16 * self.bins.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.spec_hash);
        out.extend_from_slice(&self.next_unit.to_le_bytes());
        out.extend_from_slice(&self.compositions.to_le_bytes());
        out.extend_from_slice(&(self.bins.len() as u32).to_le_bytes());
        for b in &self.bins {
            let (s, c) = b.parts();
            out.extend_from_slice(&s.to_le_bytes());
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let bad = |what: &str| Error::Checkpoint(format!("truncated or corrupt checkpoint ({what})"));
        let mut take = |n: usize| -> Result<Vec<u8>> {
            let mut buf = vec![0u8; n];
            bytes.read_exact(&mut buf).map_err(|_| bad("short read"))?;
            Ok(buf)
        };
        if take(4)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
        }
        let spec_hash: [u8; 32] = take(32)?.try_into().unwrap();
        let next_unit = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let compositions = u128::from_le_bytes(take(16)?.try_into().unwrap());
        let nbins = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut bins = Vec::with_capacity(nbins);
        for _ in 0..nbins {
            let s = f64::from_le_bytes(take(8)?.try_into().unwrap());
            let c = f64::from_le_bytes(take(8)?.try_into().unwrap());
            bins.push(CompensatedSum::from_parts(s, c));
        }
        Ok(Self {
            spec_hash,
            next_unit,
            compositions,
            bins,
        })
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Option<Self>> {
        match std::fs::read(path) {
            Ok(bytes) => Self::from_bytes(&bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}
