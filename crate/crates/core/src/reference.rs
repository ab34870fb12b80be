//! Published reference values bundled with the crate, used by the
//! acceptance suite and `twolevel reproduce`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::discrepancy::{max_ratio_dev, risky_safe_sizes, SampleSizes, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE};
use crate::error::Result;
use crate::exactdist::uniform;
use crate::onelevel::OneLevelTest;
use crate::twolevel::NullKind;

const RAW: &str = include_str!("../data/reference_values.json");

/// A printed category distribution with its limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassColumn {
    pub id: String,
    pub test: OneLevelTest,
    /// Random Excursions state (the ±x columns are symmetric).
    #[serde(default)]
    pub x: Option<i32>,
    pub n: u64,
    pub q: Vec<f64>,
    pub delta: f64,
    pub n_safe: u64,
    pub n_risky: u64,
}

impl ClassColumn {
    /// Sizes from the printed δ and u recomputed from the printed q.
    pub fn sizes_from_printed(&self) -> Result<SampleSizes> {
        let u = max_ratio_dev(&self.q, &uniform(9))?;
        risky_safe_sizes(self.delta, u, 9, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialLimit {
    pub id: String,
    pub test: OneLevelTest,
    pub n: u64,
    #[serde(default)]
    pub n_safe: Option<u64>,
    #[serde(default)]
    pub n_risky: Option<u64>,
    /// A rounded safe size, to be met within `relative_tolerance`.
    #[serde(default)]
    pub n_safe_approx: Option<u64>,
    #[serde(default)]
    pub relative_tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncentralReference {
    pub nu: u32,
    pub alpha_risky: f64,
    pub alpha_safe: f64,
    pub probability: f64,
}

/// A Monte-Carlo estimate with its reported spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReference {
    pub id: String,
    pub test: OneLevelTest,
    pub n: u64,
    #[serde(default)]
    pub samples: Option<f64>,
    pub delta: f64,
    pub u: f64,
    pub delta_sd: f64,
    pub u_sd: f64,
    pub n_safe: u64,
    pub n_risky: u64,
    pub q: Vec<f64>,
}

/// One row of published second-level p-values over five seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelRow {
    pub table: String,
    pub test: OneLevelTest,
    #[serde(default)]
    pub x: Option<i32>,
    pub gen: String,
    pub null: NullKind,
    #[serde(rename = "N")]
    pub big_n: u64,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    /// Per seed, the (x, p) pairs below the significance level.
    #[serde(default)]
    pub rejections: Option<Vec<Vec<(i32, f64)>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub format: u32,
    pub class_tables: BTreeMap<String, Vec<ClassColumn>>,
    pub binomial_limits: Vec<BinomialLimit>,
    pub noncentral: NoncentralReference,
    pub monte_carlo: Vec<McReference>,
    pub two_level: Vec<TwoLevelRow>,
}

impl ReferenceValues {
    pub fn class_table(&self, name: &str) -> &[ClassColumn] {
        self.class_tables.get(name).map_or(&[], Vec::as_slice)
    }

    pub fn monte_carlo(&self, id: &str) -> Option<&McReference> {
        self.monte_carlo.iter().find(|m| m.id == id)
    }

    pub fn binomial_limit(&self, id: &str) -> Option<&BinomialLimit> {
        self.binomial_limits.iter().find(|m| m.id == id)
    }

    pub fn two_level_rows<'a>(&'a self, table: &'a str) -> impl Iterator<Item = &'a TwoLevelRow> + 'a {
        self.two_level.iter().filter(move |r| r.table == table)
    }
}

pub fn reference_values() -> &'static ReferenceValues {
    static VALUES: OnceLock<ReferenceValues> = OnceLock::new();
    VALUES.get_or_init(|| serde_json::from_str(RAW).expect("bundled reference data parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_loads() {
        let r = reference_values();
        assert_eq!(r.class_table("T1").len(), 3);
        assert_eq!(r.class_table("T3").len(), 4);
        assert_eq!(r.monte_carlo.len(), 3);
        for row in &r.two_level {
            let five = row.p.as_ref().map(Vec::len).or(row.rejections.as_ref().map(Vec::len));
            assert_eq!(five, Some(5), "{row:?}");
            assert!(row.gen.parse::<crate::bitgen::SourceKind>().is_ok());
        }
    }
}
