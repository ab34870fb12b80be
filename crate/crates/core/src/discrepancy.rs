//! Discrepancy of a category distribution from the second-level null, and
//! the second-level sample sizes it implies.
//!
//! With δ = Σ(q_i − p_i)²/p_i and u = max|1 − q_i/p_i|, the expected
//! second-level statistic satisfies |E(χ²) − (ν + Nδ)| ≤ νu. The risky size
//! is the smallest N whose shifted mean can reach χ²_ν(0.0001), and the safe
//! size the largest N whose shifted mean stays below χ²_ν(0.25).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactdist::{CategoryDistribution, Provenance};
use crate::numerics::{chi2_isf, noncentral_chi2_sf, ChiSquaredQuantile, CompensatedSum};

/// Allowed deviation of Σq from one. Published q columns are rounded to
/// seven digits and sum to one only to about 1e-7.
pub const Q_SUM_TOLERANCE: f64 = 1e-6;
/// Allowed deviation of Σp from one.
pub const P_SUM_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_ALPHA_RISKY: f64 = 0.0001;
pub const DEFAULT_ALPHA_SAFE: f64 = 0.25;

fn check(q: &[f64], p: &[f64]) -> Result<()> {
    if q.len() != p.len() {
        return Err(Error::InvalidDistribution(format!(
            "{} bins against {} null bins",
            q.len(),
            p.len()
        )));
    }
    if let Some(bad) = p.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::InvalidDistribution(format!("null probability {bad} is not positive")));
    }
    if q.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidDistribution("negative bin probability".into()));
    }
    let (sq, sp): (f64, f64) = (q.iter().sum(), p.iter().sum());
    if (sq - 1.0).abs() > Q_SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("q sums to {sq}")));
    }
    if (sp - 1.0).abs() > P_SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("p sums to {sp}")));
    }
    Ok(())
}

/// δ = Σ(q_i − p_i)²/p_i.
pub fn chi2_discrepancy(q: &[f64], p: &[f64]) -> Result<f64> {
    check(q, p)?;
    let s: CompensatedSum = q.iter().zip(p).map(|(&a, &b)| (a - b) * (a - b) / b).collect();
    Ok(s.value())
}

/// u = max_i |1 − q_i/p_i|.
pub fn max_ratio_dev(q: &[f64], p: &[f64]) -> Result<f64> {
    check(q, p)?;
    Ok(q.iter().zip(p).map(|(&a, &b)| (1.0 - a / b).abs()).fold(0.0, f64::max))
}

/// N₀.₂₅ and N₀.₀₀₀₁ with the quantities that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSizes {
    /// `None` when χ²_ν(α_safe) − ν − νu ≤ 0: no N is safe.
    pub n_safe: Option<u64>,
    pub n_risky: u64,
    pub quantile_safe: ChiSquaredQuantile,
    pub quantile_risky: ChiSquaredQuantile,
}

/// N_risky = ⌈(χ²_ν(α_risky) − ν + νu)/δ⌉ and
/// N_safe = ⌊(χ²_ν(α_safe) − ν − νu)/δ⌋.
pub fn risky_safe_sizes(delta: f64, u: f64, nu: u32, alpha_risky: f64, alpha_safe: f64) -> Result<SampleSizes> {
    if delta == 0.0 {
        return Err(Error::ZeroDiscrepancy);
    }
    if !(delta > 0.0) || !(u >= 0.0) {
        return Err(Error::Domain(format!("need δ > 0 and u ≥ 0, got δ={delta}, u={u}")));
    }
    let quantile_risky = ChiSquaredQuantile::new(nu, alpha_risky)?;
    let quantile_safe = ChiSquaredQuantile::new(nu, alpha_safe)?;
    let nuf = nu as f64;
    let risky = ((quantile_risky.x_alpha - nuf + u * nuf) / delta).ceil();
    let safe_num = quantile_safe.x_alpha - nuf - u * nuf;
    let n_safe = (safe_num > 0.0).then(|| (safe_num / delta).floor() as u64);
    Ok(SampleSizes {
        n_safe,
        n_risky: risky as u64,
        quantile_safe,
        quantile_risky,
    })
}

/// (ν + Nδ − νu, ν + Nδ + νu), the range of E(χ²) at second sample size N.
pub fn expected_chi2_window(n: u64, delta: f64, u: f64, nu: u32) -> (f64, f64) {
    let centre = nu as f64 + n as f64 * delta;
    let half = nu as f64 * u;
    (centre - half, centre + half)
}

/// P(noncentral χ²_ν(λ) ≥ χ²_ν(significance)).
pub fn rejection_probability(nu: u32, lambda: f64, significance: f64) -> Result<f64> {
    noncentral_chi2_sf(nu, lambda, chi2_isf(nu, significance)?)
}

/// δ, u and the sample sizes of one distribution against a null.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub label: String,
    pub delta: f64,
    pub u: f64,
    pub nu: u32,
    pub n_safe: Option<u64>,
    pub n_risky: Option<u64>,
    pub q_source: Provenance,
    pub quantile_safe: ChiSquaredQuantile,
    pub quantile_risky: ChiSquaredQuantile,
}

impl DiscrepancyReport {
    /// Report for `dist` against `null`. When δ = 0 both sizes are `None`.
    pub fn new(dist: &CategoryDistribution, null: &[f64], alpha_risky: f64, alpha_safe: f64) -> Result<Self> {
        Self::from_parts(
            &dist.label,
            dist.provenance,
            chi2_discrepancy(&dist.q, null)?,
            max_ratio_dev(&dist.q, null)?,
            dist.nu,
            alpha_risky,
            alpha_safe,
        )
    }

    pub fn from_parts(
        label: &str,
        q_source: Provenance,
        delta: f64,
        u: f64,
        nu: u32,
        alpha_risky: f64,
        alpha_safe: f64,
    ) -> Result<Self> {
        let (n_safe, n_risky, quantile_safe, quantile_risky) = match risky_safe_sizes(delta, u, nu, alpha_risky, alpha_safe) {
            Ok(s) => (s.n_safe, Some(s.n_risky), s.quantile_safe, s.quantile_risky),
            Err(Error::ZeroDiscrepancy) => (
                None,
                None,
                ChiSquaredQuantile::new(nu, alpha_safe)?,
                ChiSquaredQuantile::new(nu, alpha_risky)?,
            ),
            Err(e) => return Err(e),
        };
        Ok(Self {
            label: label.to_string(),
            delta,
            u,
            nu,
            n_safe,
            n_risky,
            q_source,
            quantile_safe,
            quantile_risky,
        })
    }

    pub fn to_table(&self) -> String {
        let size = |v: Option<u64>, none: &str| v.map_or(none.to_string(), group_thousands);
        let mut out = format!("{} ({})\n", self.label, self.q_source);
        out.push_str(&format!("delta    {:.6e}\n", self.delta));
        out.push_str(&format!("u        {:.6}\n", self.u));
        if self.delta == 0.0 {
            out.push_str("no finite limits (delta = 0)\n");
            return out;
        }
        out.push_str(&format!(
            "N_{}   {}\n",
            self.quantile_safe.alpha,
            size(self.n_safe, "no safe size")
        ));
        out.push_str(&format!("N_{} {}\n", self.quantile_risky.alpha, size(self.n_risky, "-")));
        out
    }
}

/// 1234567 → "1,234,567".
pub fn group_thousands(v: u64) -> String {
    let s = v.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}
