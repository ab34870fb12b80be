//! The one-level tests, computing approximated p-values the way SP800-22
//! does.
//!
//! | test | block | classes |
//! |---|---|---|
//! | Frequency | whole sequence | normal approximation |
//! | Block Frequency | m bits | χ² with n_b df |
//! | Longest Run | 8, 128 or 10⁴ bits | 4, 6 or 7 |
//! | Overlapping Template | 1032 bits | 6 |
//! | Linear Complexity | 500..=5000 bits | 7 |
//! | Random Excursions | first 500 cycles | 6 per state, 8 states |
//! | DFT | whole sequence | normal approximation |

mod dft;
mod excursions;
mod frequency;
mod linear;
mod longest;
mod overlap;
mod runs;
mod spec;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dft::{dft_count, dft_magnitudes, dft_mean, dft_p_value, dft_test, DftVariance, DFT_THRESHOLD_FACTOR};
pub use excursions::{
    excursion_class_probs, excursion_scan, excursion_spec, random_excursions_test, ExcursionOutcome,
    EXCURSION_CYCLES, EXCURSION_STATES,
};
pub use frequency::{
    block_frequency_p_value, block_frequency_statistic, block_frequency_test, block_ones, frequency_p_value,
    frequency_test,
};
pub use linear::{
    berlekamp_massey, linear_class, linear_complexity, linear_complexity_test, linear_counts, linear_mean,
    linear_spec, LINEAR_CLASS_PROBS,
};
pub use longest::{
    longest_run_boundaries, longest_run_class, longest_run_class_probs, longest_run_counts, longest_run_spec,
    longest_run_test, prob_longest_at_most,
};
pub use overlap::{
    overlap_class_probs, overlap_counts, overlap_spec, overlapping_template_test, template_matches,
    OVERLAP_BLOCK, OVERLAP_K,
};
pub use runs::{for_each_run, longest_run};
pub use spec::{chi2_class_statistic, class_term, TestSpec};

use crate::bitgen::BitBlock;
use crate::error::{Error, Result};

/// A one-level test with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OneLevelTest {
    Frequency,
    BlockFrequency { m: usize },
    LongestRun { m: usize },
    OverlappingTemplate,
    LinearComplexity { m: usize },
    RandomExcursions,
    Dft { variance: DftVariance },
}

impl OneLevelTest {
    /// Number of p-values per evaluation.
    pub fn channels(&self) -> usize {
        match self {
            OneLevelTest::RandomExcursions => 8,
            _ => 1,
        }
    }

    pub fn channel_labels(&self) -> Vec<String> {
        match self {
            OneLevelTest::RandomExcursions => EXCURSION_STATES.iter().map(|x| format!("x={x}")).collect(),
            _ => vec![self.to_string()],
        }
    }

    /// p-values for one block, or `None` when the test yields no result.
    pub fn evaluate(&self, block: &BitBlock) -> Result<Option<Vec<f64>>> {
        let one = |p: f64| Ok(Some(vec![p]));
        match *self {
            OneLevelTest::Frequency => one(frequency_test(block)?),
            OneLevelTest::BlockFrequency { m } => one(block_frequency_test(block, m)?),
            OneLevelTest::LongestRun { m } => one(longest_run_test(block, m)?),
            OneLevelTest::OverlappingTemplate => one(overlapping_template_test(block)?),
            OneLevelTest::LinearComplexity { m } => one(linear_complexity_test(block, m)?),
            OneLevelTest::RandomExcursions => Ok(random_excursions_test(block)),
            OneLevelTest::Dft { variance } => one(dft_test(block, variance)?),
        }
    }

    /// Multinomial class specs for first-level sample size n, one per
    /// channel. Errors for tests that are not class-count tests.
    pub fn class_specs(&self, n: u64) -> Result<Vec<TestSpec>> {
        match *self {
            OneLevelTest::LongestRun { m } => Ok(vec![longest_run_spec(n, m as u64)?]),
            OneLevelTest::OverlappingTemplate => Ok(vec![overlap_spec(n)?]),
            OneLevelTest::LinearComplexity { m } => Ok(vec![linear_spec(n, m as u64)?]),
            OneLevelTest::RandomExcursions => EXCURSION_STATES.iter().map(|&x| excursion_spec(x)).collect(),
            _ => Err(Error::Unsupported(format!("{self} is not a class-count test"))),
        }
    }

    /// Checks that blocks of n bits are valid input.
    pub fn validate(&self, n: usize) -> Result<()> {
        let need = |needed: usize| {
            if n < needed {
                Err(Error::BlockTooShort { needed, got: n })
            } else {
                Ok(())
            }
        };
        match *self {
            OneLevelTest::Frequency => need(100),
            OneLevelTest::BlockFrequency { m } => {
                if m == 0 {
                    return Err(Error::Domain("block size must be positive".into()));
                }
                need(m)
            }
            OneLevelTest::LongestRun { m } => {
                longest_run_boundaries(m as u64)?;
                need(m)
            }
            OneLevelTest::OverlappingTemplate => need(OVERLAP_BLOCK),
            OneLevelTest::LinearComplexity { m } => {
                linear_spec(n as u64, m as u64)?;
                need(m)
            }
            OneLevelTest::RandomExcursions => need(1),
            OneLevelTest::Dft { .. } => {
                if n % 2 == 1 {
                    return Err(Error::OddLength(n));
                }
                need(2)
            }
        }
    }
}

impl fmt::Display for OneLevelTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OneLevelTest::Frequency => write!(f, "frequency"),
            OneLevelTest::BlockFrequency { m } => write!(f, "block-frequency:{m}"),
            OneLevelTest::LongestRun { m } => write!(f, "longest-run:{m}"),
            OneLevelTest::OverlappingTemplate => write!(f, "overlapping-template"),
            OneLevelTest::LinearComplexity { m } => write!(f, "linear-complexity:{m}"),
            OneLevelTest::RandomExcursions => write!(f, "random-excursions"),
            OneLevelTest::Dft { variance } => write!(f, "dft:{}", variance.to_string().to_lowercase()),
        }
    }
}

impl FromStr for OneLevelTest {
    type Err = Error;

    /// `name[:param]`, e.g. `longest-run:10000`, `dft:sigma2`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, param) = match lower.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (lower.as_str(), None),
        };
        let size = |default: usize| -> Result<usize> {
            match param {
                None => Ok(default),
                Some(p) => p
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad block size {p:?} in {s:?}"))),
            }
        };
        Ok(match name {
            "frequency" | "monobit" => OneLevelTest::Frequency,
            "block-frequency" | "blockfrequency" => OneLevelTest::BlockFrequency { m: size(128)? },
            "longest-run" | "longest" => OneLevelTest::LongestRun { m: size(10_000)? },
            "overlapping-template" | "overlap" => OneLevelTest::OverlappingTemplate,
            "linear-complexity" | "linear" => OneLevelTest::LinearComplexity { m: size(5000)? },
            "random-excursions" | "excursions" => OneLevelTest::RandomExcursions,
            "dft" | "spectral" => OneLevelTest::Dft {
                variance: param.map_or(Ok(DftVariance::Sigma0), str::parse)?,
            },
            _ => return Err(Error::Unsupported(format!("unknown test {s:?}"))),
        })
    }
}

impl TryFrom<String> for OneLevelTest {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OneLevelTest> for String {
    fn from(t: OneLevelTest) -> String {
        t.to_string()
    }
}
