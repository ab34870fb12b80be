use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BitBlock;
use crate::error::Result;

/// How to interpret the bytes of a bit file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    /// ASCII if every byte is '0', '1' or whitespace, raw otherwise.
    #[default]
    Auto,
    Raw,
    Ascii,
}

impl FileFormat {
    pub fn sniff(bytes: &[u8]) -> FileFormat {
        let ascii = !bytes.is_empty()
            && bytes
                .iter()
                .all(|b| matches!(b, b'0' | b'1') || b.is_ascii_whitespace());
        if ascii {
            FileFormat::Ascii
        } else {
            FileFormat::Raw
        }
    }
}

pub fn decode(bytes: &[u8], format: FileFormat) -> Result<BitBlock> {
    let format = match format {
        FileFormat::Auto => FileFormat::sniff(bytes),
        f => f,
    };
    match format {
        FileFormat::Ascii => String::from_utf8_lossy(bytes).parse(),
        _ => Ok(BitBlock::from_bytes(bytes)),
    }
}

pub fn read_bits(path: &Path, format: FileFormat) -> Result<BitBlock> {
    decode(&std::fs::read(path)?, format)
}

pub fn write_bits(path: &Path, bits: &BitBlock, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Ascii => std::fs::write(path, bits.to_string())?,
        _ => std::fs::write(path, bits.to_bytes())?,
    }
    Ok(())
}
