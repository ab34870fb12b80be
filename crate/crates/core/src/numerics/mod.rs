//! Special functions and distributions behind every p-value and
//! sample-size computation in the crate.
//!
//! | Function | Meaning |
//! |----------|---------|
//! | [`log_gamma`] | ln Γ(x) |
//! | [`igamc`] | regularized upper incomplete gamma Q(a, x) |
//! | [`erfc`] | complementary error function |
//! | [`chi2_sf`], [`chi2_isf`] | χ²_ν survival function and its inverse |
//! | [`noncentral_chi2_sf`] | survival function of the noncentral χ²_ν(λ) |
//! | [`log_multinomial_pmf`] | log multinomial probability |
//!
//! All functions are pure and may be called from any thread.

mod chi2;
mod gamma;
mod pmf;
mod sum;

use serde::{Deserialize, Serialize};

pub use chi2::{chi2_isf, chi2_pdf, chi2_sf, noncentral_chi2_sf, ChiSquaredQuantile};
pub use gamma::{bd0, erfc, igam, igamc, log_gamma, stirlerr};
pub use pmf::{binomial_coefficient, binomial_pmf, log_multinomial_pmf};
pub use sum::{compensated_sum, CompensatedSum};

pub(crate) use chi2::chi2_sf_unchecked;
pub(crate) use gamma::{igamc_unchecked, log_gamma_unchecked};

use crate::error::{Error, Result};

/// A real number in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("{value} is not a probability")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(0.0).is_ok());
        assert!(Probability::new(1.0).is_ok());
        assert!(Probability::new(1.0 + 1e-15).is_err());
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        let p: Probability = serde_json::from_str("0.25").unwrap();
        assert_eq!(p.value(), 0.25);
        assert!(serde_json::from_str::<Probability>("1.5").is_err());
    }
}
