use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Where a category distribution came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    MonteCarlo,
    /// Transcribed from a published table.
    Reference,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Reference => "reference",
        })
    }
}

/// Rounds to 15 significant digits.
pub fn round_sig15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn ser_sig15<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&x| round_sig15(x)))
}

fn ser_sig15_opt<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_sig15(v, s),
        None => s.serialize_none(),
    }
}

fn ser_sig15_one<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig15(*v))
}

/// Probabilities (q_0..q_ν) that an approximated p-value falls in each of
/// the ν + 1 equal subintervals of [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    /// What was measured, e.g. `longest-run(m=10000), n=1000000`.
    pub label: String,
    #[serde(serialize_with = "ser_sig15")]
    pub q: Vec<f64>,
    pub nu: u32,
    pub provenance: Provenance,
    #[serde(default, serialize_with = "ser_sig15_opt", skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    /// Total probability mass summed into the bins.
    #[serde(serialize_with = "ser_sig15_one")]
    pub mass_accounted: f64,
}

impl CategoryDistribution {
    pub fn new(label: impl Into<String>, q: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidDistribution("need at least two bins".into()));
        }
        if q.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("negative or NaN bin in {q:?}")));
        }
        let mass = q.iter().sum();
        Ok(Self {
            label: label.into(),
            nu: q.len() as u32 - 1,
            q,
            provenance,
            stderr: None,
            mass_accounted: mass,
        })
    }

    pub fn uniform(nu: u32) -> Self {
        Self::new("uniform", uniform(nu), Provenance::Exact).expect("uniform is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        if d.q.len() != d.nu as usize + 1 {
            return Err(Error::InvalidDistribution(format!(
                "nu = {} but {} bins",
                d.nu,
                d.q.len()
            )));
        }
        Ok(d)
    }

    /// Aligned text rendering, one bin per line.
    pub fn to_table(&self) -> String {
        let mut out = format!("{} ({})\n", self.label, self.provenance);
        for (i, q) in self.q.iter().enumerate() {
            match &self.stderr {
                Some(se) => out.push_str(&format!("q{i:<3} {:.7}  ± {:.1e}\n", q, se[i])),
                None => out.push_str(&format!("q{i:<3} {:.7}\n", q)),
            }
        }
        out.push_str(&format!("mass {:.12}\n", self.mass_accounted));
        out
    }
}

/// p_i = 1/(ν+1).
pub fn uniform(nu: u32) -> Vec<f64> {
    vec![1.0 / (nu as f64 + 1.0); nu as usize + 1]
}

/// Index of the interval containing p: I_i = [i/(ν+1), (i+1)/(ν+1)) for
/// i < ν and I_ν = [ν/(ν+1), 1]. Boundaries are the nearest doubles to
/// i/(ν+1), so a p-value equal to one belongs to the upper interval.
#[inline]
pub fn interval_index(p: f64, nu: u32) -> usize {
    debug_assert!((0.0..=1.0).contains(&p), "p-value {p} outside [0, 1]");
    let bins = nu as f64 + 1.0;
    let mut i = ((p * bins) as usize).min(nu as usize);
    if i > 0 && p < i as f64 / bins {
        i -= 1;
    } else if i < nu as usize && p >= (i + 1) as f64 / bins {
        i += 1;
    }
    i
}
