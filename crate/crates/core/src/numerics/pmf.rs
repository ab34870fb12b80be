//! Probability mass functions used by the exact enumerations.

use std::f64::consts::PI;

use super::gamma::{bd0, log_gamma_unchecked, stirlerr};
use crate::error::{Error, Result};

/// ln of the multinomial probability n!/(x_0!⋯x_k!) · π_0^{x_0}⋯π_k^{x_k}.
pub fn log_multinomial_pmf(n: u64, counts: &[u64], probs: &[f64]) -> Result<f64> {
    if counts.len() != probs.len() {
        return Err(Error::Domain(format!(
            "{} counts but {} probabilities",
            counts.len(),
            probs.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total != n {
        return Err(Error::Domain(format!("counts sum to {total}, expected {n}")));
    }
    let psum: f64 = probs.iter().sum();
    if (psum - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("probabilities sum to {psum}")));
    }
    let mut acc = log_gamma_unchecked(n as f64 + 1.0);
    for (&x, &p) in counts.iter().zip(probs) {
        if p < 0.0 {
            return Err(Error::Domain(format!("negative probability {p}")));
        }
        if x == 0 {
            continue;
        }
        if p == 0.0 {
            return Err(Error::Domain("positive count in a zero-probability cell".into()));
        }
        acc += x as f64 * p.ln() - log_gamma_unchecked(x as f64 + 1.0);
    }
    Ok(acc)
}

/// Binomial coefficient as an exact integer, `None` on overflow.
pub fn binomial_coefficient(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// P(X = x) for X ~ Binom(n, p), using the saddle-point form
/// exp(-stirlerr terms - deviances) / √(2π x (n-x)/n), which keeps full
/// relative accuracy for n in the millions.
pub fn binomial_pmf(x: u64, n: u64, p: f64) -> f64 {
    if x > n {
        return 0.0;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let (xf, nf) = (x as f64, n as f64);
    if x == 0 {
        return (nf * q.ln()).exp();
    }
    if x == n {
        return (nf * p.ln()).exp();
    }
    let lc = stirlerr(nf) - stirlerr(xf) - stirlerr(nf - xf) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = (2.0 * PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}
