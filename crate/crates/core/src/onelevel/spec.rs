use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multinomial one-level test: `n_b` independent blocks, each falling in
/// one of `k + 1` classes with probabilities `probs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub name: String,
    /// Bits per block (cycles for Random Excursions).
    pub m: u64,
    pub probs: Vec<f64>,
    pub n_b: u64,
    pub df: u32,
}

impl TestSpec {
    pub fn new(name: impl Into<String>, m: u64, probs: Vec<f64>, n_b: u64) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution("need at least two classes".into()));
        }
        if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::InvalidDistribution(format!(
                "class probabilities must lie in (0, 1]: {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "class probabilities sum to {total}"
            )));
        }
        if n_b == 0 {
            return Err(Error::Domain("spec needs at least one block".into()));
        }
        let df = probs.len() as u32 - 1;
        Ok(Self {
            name: name.into(),
            m,
            probs,
            n_b,
            df,
        })
    }

    /// k, the number of classes minus one.
    pub fn k(&self) -> usize {
        self.probs.len() - 1
    }

    /// Expected class counts n_b·π_i.
    pub fn expected(&self) -> Vec<f64> {
        self.probs.iter().map(|p| self.n_b as f64 * p).collect()
    }
}

/// One term (X − e)²/e of the class statistic. Shared with the enumerators
/// so their statistics are bit-identical to the tests'.
#[inline]
pub fn class_term(x: u64, expected: f64) -> f64 {
    let d = x as f64 - expected;
    d * d / expected
}

/// T = Σ (X_i − n_b π_i)² / (n_b π_i), summed in class order.
pub fn chi2_class_statistic(counts: &[u64], spec: &TestSpec) -> f64 {
    debug_assert_eq!(counts.len(), spec.probs.len());
    counts
        .iter()
        .zip(&spec.probs)
        .map(|(&x, &p)| class_term(x, spec.n_b as f64 * p))
        .fold(0.0, |acc, t| acc + t)
}
