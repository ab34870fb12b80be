use serde::{Deserialize, Serialize};

use super::distribution::{interval_index, CategoryDistribution, Provenance};
use crate::error::{Error, Result};
use crate::numerics::{binomial_coefficient, binomial_pmf, CompensatedSum};
use crate::onelevel::{dft_p_value, frequency_p_value, DftVariance};

/// Tests whose statistic depends on the block through a single binomial
/// count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BinomialModel {
    /// Ones among n fair bits.
    Frequency,
    /// Fourier magnitudes below the threshold, modelled as Binom(n/2, 0.95).
    Dft,
}

/// C(n, j)/2^n, exactly when n ≤ 62.
fn fair_pmf(j: u64, n: u64) -> f64 {
    if n <= 62 {
        binomial_coefficient(n, j).unwrap() as f64 / (n as f64).exp2()
    } else {
        binomial_pmf(j, n, 0.5)
    }
}

/// q by summing the binomial mass of each count into the bin of its
/// p-value.
pub fn binomial_scan_q(model: BinomialModel, n: u64, variance: DftVariance, nu: u32) -> Result<CategoryDistribution> {
    if n == 0 || nu == 0 {
        return Err(Error::Domain("n and nu must be positive".into()));
    }
    let mut bins = vec![CompensatedSum::new(); nu as usize + 1];
    let label = match model {
        BinomialModel::Frequency => {
            for j in 0..=n {
                bins[interval_index(frequency_p_value(j, n), nu)].add(fair_pmf(j, n));
            }
            format!("frequency, n={n}")
        }
        BinomialModel::Dft => {
            if n % 2 == 1 {
                return Err(Error::OddLength(n as usize));
            }
            let half = n / 2;
            for j in 0..=half {
                let pmf = binomial_pmf(j, half, 0.95);
                if pmf > 0.0 {
                    bins[interval_index(dft_p_value(j, n, variance), nu)].add(pmf);
                }
            }
            format!("dft({variance}), n={n}")
        }
    };
    let q: Vec<f64> = bins.iter().map(|b| b.value()).collect();
    let mass = q.iter().sum();
    let mut d = CategoryDistribution::new(label, q, Provenance::Exact)?;
    d.mass_accounted = mass;
    Ok(d)
}
