use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use twolevel_core::bitgen::Derivation;

use crate::error::{CliError, CliResult};

/// Every JSON artifact: the result plus what produced it.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a serde_json::Value,
    pub seeds: &'a [Derivation],
    pub result: T,
}

pub struct Output {
    pub dir: PathBuf,
    pub config: serde_json::Value,
}

/// File-name-safe form of a label.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

impl Output {
    pub fn path(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.dir.join(name)
        }
    }

    pub fn write_json<T: Serialize>(&self, name: &Path, seeds: &[Derivation], result: T) -> CliResult<PathBuf> {
        let env = Envelope {
            tool: "twolevel",
            version: env!("CARGO_PKG_VERSION"),
            config: &self.config,
            seeds,
            result,
        };
        let text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
        self.write_text(name, &(text + "\n"))
    }

    pub fn write_text(&self, name: &Path, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Default output name, unless the user gave one.
pub fn name_or(given: &Option<PathBuf>, stem: &str, ext: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| PathBuf::from(format!("{}.{ext}", slug(stem))))
}
