//! Central and noncentral chi-squared tail probabilities and quantiles.

use serde::{Deserialize, Serialize};

use super::gamma::{gamma_density, igamc_unchecked, log_gamma_unchecked};
use super::sum::CompensatedSum;
use crate::error::{Error, Result};

/// Poisson tail mass at which the noncentral mixture series is truncated.
const NONCENTRAL_TAIL: f64 = 1e-14;
/// Relative tolerance of quantiles on the survival-function scale.
const QUANTILE_TOL: f64 = 1e-12;

/// An upper 100α-th percentile χ²_ν(α) together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredQuantile {
    pub nu: u32,
    pub alpha: f64,
    pub x_alpha: f64,
}

impl ChiSquaredQuantile {
    pub fn new(nu: u32, alpha: f64) -> Result<Self> {
        Ok(Self {
            nu,
            alpha,
            x_alpha: chi2_isf(nu, alpha)?,
        })
    }
}

fn check_nu(nu: u32) -> Result<()> {
    if nu == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    Ok(())
}

/// P(X ≥ x) for X ~ χ²_ν.
pub fn chi2_sf(nu: u32, x: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("chi2_sf requires x >= 0, got {x}")));
    }
    Ok(chi2_sf_unchecked(nu, x))
}

#[inline]
pub(crate) fn chi2_sf_unchecked(nu: u32, x: f64) -> f64 {
    igamc_unchecked(nu as f64 / 2.0, x / 2.0)
}

/// Density of χ²_ν at x.
pub fn chi2_pdf(nu: u32, x: f64) -> f64 {
    0.5 * gamma_density(nu as f64 / 2.0, x / 2.0)
}

/// The x with P(X ≥ x) = alpha for X ~ χ²_ν.
///
/// Bisection on a guaranteed bracket, finished by safeguarded Newton steps.
pub fn chi2_isf(nu: u32, alpha: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "chi2_isf requires 0 < alpha < 1, got {alpha}"
        )));
    }
    let sf = |x: f64| chi2_sf_unchecked(nu, x);
    let mut lo = 0.0;
    let mut hi = nu as f64 + 10.0;
    while sf(hi) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    // sf(lo) > alpha >= sf(hi)
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = sf(x) - alpha;
        if f.abs() <= QUANTILE_TOL * alpha {
            break;
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = f / chi2_pdf(nu, x);
        let next = x + step;
        x = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(x)
}

/// Survival function of the noncentral χ²_ν(λ) via its Poisson mixture
/// Σ_j e^{-λ/2}(λ/2)^j/j! · P(χ²_{ν+2j} ≥ x).
pub fn noncentral_chi2_sf(nu: u32, lambda: f64, x: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "noncentrality must be finite and >= 0, got {lambda}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x must be >= 0, got {x}")));
    }
    if lambda == 0.0 {
        return Ok(chi2_sf_unchecked(nu, x));
    }
    let half = lambda / 2.0;
    let ln_half = half.ln();
    let mut total = CompensatedSum::new();
    let mut weight_seen = CompensatedSum::new();
    let mut j = 0u32;
    loop {
        let ln_w = -half + j as f64 * ln_half - log_gamma_unchecked(j as f64 + 1.0);
        let w = ln_w.exp();
        weight_seen.add(w);
        if w > 0.0 {
            total.add(w * chi2_sf_unchecked(nu + 2 * j, x));
        }
        // Past the mode the remaining Poisson mass shrinks geometrically.
        if j as f64 > half && 1.0 - weight_seen.value() < NONCENTRAL_TAIL {
            break;
        }
        j += 1;
        if j > 10_000_000 {
            break;
        }
    }
    Ok(total.value().clamp(0.0, 1.0))
}
