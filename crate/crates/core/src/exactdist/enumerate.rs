use std::path::PathBuf;

use num_bigint::BigUint;
use rayon::prelude::*;

use super::checkpoint::{spec_hash, Checkpoint};
use super::distribution::{interval_index, CategoryDistribution, Provenance};
use crate::error::{Error, Result};
use crate::numerics::{binomial_coefficient, chi2_isf, chi2_sf_unchecked, log_gamma_unchecked, CompensatedSum};
use crate::onelevel::{chi2_class_statistic, class_term, TestSpec};

pub const DEFAULT_BUDGET: u128 = 10_000_000_000;
pub const DEFAULT_CHECKPOINT_EVERY: u128 = 100_000_000;
/// Terms whose log-probability is below this underflow to zero in f64.
const LOG_UNDERFLOW: f64 = -750.0;
/// Relative distance from a bin threshold inside which the bin is decided
/// by the reference statistic and igamc.
const THRESHOLD_GUARD: f64 = 1e-8;

/// C(n_b + k, k), saturating at `u128::MAX`.
pub fn estimate_workload(spec: &TestSpec) -> u128 {
    let k = spec.k() as u64;
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (spec.n_b + k - i) / (i + 1);
    }
    u128::try_from(acc).unwrap_or(u128::MAX)
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    /// Contiguous slices each batch of work units is split into.
    pub partitions: usize,
    /// Refuse specs with more compositions than this unless checkpointing.
    pub budget: u128,
    pub checkpoint: Option<PathBuf>,
    /// Compositions between checkpoint writes.
    pub checkpoint_every: u128,
    /// Stop after this many work units (for testing interruption).
    pub stop_after_units: Option<u64>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            partitions: rayon::current_num_threads(),
            budget: DEFAULT_BUDGET,
            checkpoint: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            stop_after_units: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnumerationOutcome {
    Complete(CategoryDistribution),
    /// Stopped early; the checkpoint (if any) holds the partial state.
    Interrupted { next_unit: u64, compositions: u128 },
}

struct Tables<'a> {
    spec: &'a TestSpec,
    k: usize,
    nu: u32,
    /// x·ln π_i − ln x! per class.
    lterm: Vec<Vec<f64>>,
    /// (x − n_b π_i)² / (n_b π_i) per class.
    tterm: Vec<Vec<f64>>,
    /// ln Σ_{i≤j} π_i.
    ln_prefix: Vec<f64>,
    ln_fact: Vec<f64>,
    /// χ² statistic at which the p-value equals i/(ν+1), i = 1..=ν.
    thresholds: Vec<f64>,
}

struct UnitResult {
    bins: Vec<CompensatedSum>,
}

impl<'a> Tables<'a> {
    fn new(spec: &'a TestSpec, nu: u32) -> Result<Self> {
        let n = spec.n_b as usize;
        let ln_fact: Vec<f64> = (0..=n).map(|x| log_gamma_unchecked(x as f64 + 1.0)).collect();
        let lterm = spec
            .probs
            .iter()
            .map(|&p| (0..=n).map(|x| x as f64 * p.ln() - ln_fact[x]).collect())
            .collect();
        let tterm = spec
            .probs
            .iter()
            .map(|&p| {
                let e = spec.n_b as f64 * p;
                (0..=n).map(|x| class_term(x as u64, e)).collect()
            })
            .collect();
        let mut acc = 0.0;
        let ln_prefix = spec
            .probs
            .iter()
            .map(|&p| {
                acc += p;
                acc.ln()
            })
            .collect();
        let bins = nu as f64 + 1.0;
        let thresholds = (1..=nu)
            .map(|i| chi2_isf(spec.df, i as f64 / bins))
            .collect::<Result<_>>()?;
        Ok(Self {
            spec,
            k: spec.k(),
            nu,
            lterm,
            tterm,
            ln_prefix,
            ln_fact,
            thresholds,
        })
    }

    #[inline]
    fn bin(&self, t: f64, x: &[u64]) -> usize {
        let c = &self.thresholds;
        let mut b = 0;
        while b < c.len() && t <= c[b] {
            b += 1;
        }
        let near_upper = b > 0 && c[b - 1] - t <= THRESHOLD_GUARD * c[b - 1];
        let near_lower = b < c.len() && t - c[b] <= THRESHOLD_GUARD * c[b];
        if near_upper || near_lower {
            let t = chi2_class_statistic(x, self.spec);
            return interval_index(chi2_sf_unchecked(self.spec.df, t), self.nu);
        }
        b
    }

    #[inline]
    fn leaf(&self, lp: f64, t: f64, x: &[u64], acc: &mut [CompensatedSum]) {
        if lp < LOG_UNDERFLOW {
            return;
        }
        acc[self.bin(t, x)].add(lp.exp());
    }

    /// Distributes `r` over coordinates 0..=j.
    fn descend(&self, j: usize, r: usize, lp: f64, t: f64, x: &mut [u64], acc: &mut [CompensatedSum]) {
        if j == 0 {
            x[0] = r as u64;
            self.leaf(lp + self.lterm[0][r], t + self.tterm[0][r], x, acc);
            return;
        }
        // Whole subtree is below the underflow level: every leaf would add 0.
        if lp + r as f64 * self.ln_prefix[j] - self.ln_fact[r] < LOG_UNDERFLOW {
            return;
        }
        if j == 1 {
            let (l1, l0) = (&self.lterm[1], &self.lterm[0]);
            let (t1, t0) = (&self.tterm[1], &self.tterm[0]);
            for a in 0..=r {
                x[1] = a as u64;
                x[0] = (r - a) as u64;
                self.leaf(lp + l1[a] + l0[r - a], t + t1[a] + t0[r - a], x, acc);
            }
            x[1] = 0;
            return;
        }
        for a in 0..=r {
            x[j] = a as u64;
            self.descend(j - 1, r - a, lp + self.lterm[j][a], t + self.tterm[j][a], x, acc);
        }
        x[j] = 0;
    }

    fn units(&self) -> Vec<(u64, u64)> {
        let n = self.spec.n_b;
        match self.k {
            0 | 1 => (0..=n).map(|a| (a, 0)).take(if self.k == 0 { 1 } else { usize::MAX }).collect(),
            _ => (0..=n).flat_map(|a| (0..=n - a).map(move |b| (a, b))).collect(),
        }
    }

    fn unit_size(&self, unit: (u64, u64)) -> u128 {
        if self.k < 2 {
            return 1;
        }
        let r = self.spec.n_b - unit.0 - unit.1;
        let j = self.k as u64 - 2;
        binomial_coefficient(r + j, j).unwrap_or(u128::MAX)
    }

    fn run_unit(&self, unit: (u64, u64)) -> UnitResult {
        let mut acc = vec![CompensatedSum::new(); self.nu as usize + 1];
        let mut x = vec![0u64; self.k + 1];
        let n = self.spec.n_b as usize;
        let base = self.ln_fact[n];
        match self.k {
            0 => {
                x[0] = n as u64;
                self.leaf(base + self.lterm[0][n], self.tterm[0][n], &x, &mut acc);
            }
            1 => {
                let a = unit.0 as usize;
                x[1] = a as u64;
                x[0] = (n - a) as u64;
                self.leaf(
                    base + self.lterm[0][n - a] + self.lterm[1][a],
                    self.tterm[0][n - a] + self.tterm[1][a],
                    &x,
                    &mut acc,
                );
            }
            k => {
                let (a, b) = (unit.0 as usize, unit.1 as usize);
                x[k] = a as u64;
                x[k - 1] = b as u64;
                let lp = base + self.lterm[k][a] + self.lterm[k - 1][b];
                let t = self.tterm[k][a] + self.tterm[k - 1][b];
                self.descend(k - 2, n - a - b, lp, t, &mut x, &mut acc);
            }
        }
        UnitResult { bins: acc }
    }
}

/// Exact q for a multinomial test: every composition's probability is added
/// to the bin of its approximated p-value.
pub fn enumerate_q(spec: &TestSpec, nu: u32, partitions: usize) -> Result<CategoryDistribution> {
    let opts = EnumerateOptions {
        partitions: partitions.max(1),
        ..Default::default()
    };
    match enumerate_q_with(spec, nu, &opts)? {
        EnumerationOutcome::Complete(d) => Ok(d),
        EnumerationOutcome::Interrupted { .. } => unreachable!("no stop requested"),
    }
}

pub fn enumerate_q_with(spec: &TestSpec, nu: u32, opts: &EnumerateOptions) -> Result<EnumerationOutcome> {
    if nu == 0 {
        return Err(Error::Domain("nu must be positive".into()));
    }
    let workload = estimate_workload(spec);
    if workload > opts.budget && opts.checkpoint.is_none() {
        return Err(Error::BudgetExceeded {
            estimated: workload,
            budget: opts.budget,
        });
    }
    if spec.n_b > u32::MAX as u64 {
        return Err(Error::Domain(format!("n_b = {} is too large to tabulate", spec.n_b)));
    }
    let tables = Tables::new(spec, nu)?;
    let units = tables.units();
    let hash = spec_hash(spec, nu);

    let mut totals = vec![CompensatedSum::new(); nu as usize + 1];
    let mut next = 0usize;
    let mut done: u128 = 0;
    if let Some(path) = &opts.checkpoint {
        if let Some(cp) = Checkpoint::load(path)? {
            if cp.spec_hash != hash {
                return Err(Error::Checkpoint(format!(
                    "{} belongs to a different spec",
                    path.display()
                )));
            }
            if cp.bins.len() != totals.len() || cp.next_unit as usize > units.len() {
                return Err(Error::Checkpoint(format!("{} is inconsistent", path.display())));
            }
            totals = cp.bins;
            next = cp.next_unit as usize;
            done = cp.compositions;
        }
    }

    let parts = opts.partitions.max(1);
    let limit = opts
        .stop_after_units
        .map_or(units.len(), |s| units.len().min(next + s as usize));
    while next < limit {
        let mut end = next;
        let mut batch_size: u128 = 0;
        while end < limit && (end == next || batch_size < opts.checkpoint_every) {
            batch_size = batch_size.saturating_add(tables.unit_size(units[end]));
            end += 1;
        }
        let batch = &units[next..end];
        let slice_len = batch.len().div_ceil(parts);
        let results: Vec<Vec<UnitResult>> = batch
            .par_chunks(slice_len)
            .map(|slice| slice.iter().map(|&u| tables.run_unit(u)).collect())
            .collect();
        for unit in results.iter().flatten() {
            for (t, b) in totals.iter_mut().zip(&unit.bins) {
                t.merge(b);
            }
        }
        done = done.saturating_add(batch_size);
        next = end;
        if let Some(path) = &opts.checkpoint {
            Checkpoint {
                spec_hash: hash,
                next_unit: next as u64,
                compositions: done,
                bins: totals.clone(),
            }
            .save(path)?;
        }
    }
    if next < units.len() {
        return Ok(EnumerationOutcome::Interrupted {
            next_unit: next as u64,
            compositions: done,
        });
    }
    let q: Vec<f64> = totals.iter().map(|s| s.value()).collect();
    let mass = q.iter().sum();
    let mut dist = CategoryDistribution::new(spec.name.clone(), q, Provenance::Exact)?;
    dist.mass_accounted = mass;
    Ok(EnumerationOutcome::Complete(dist))
}
