pub mod exact;
pub mod gen;
pub mod limits;
pub mod mc;
pub mod reproduce;
pub mod two_level;

use std::fs;
use std::path::{Path, PathBuf};

use twolevel_core::exactdist::{
    binomial_scan_q, enumerate_q_with, BinomialModel, CategoryDistribution,
    EnumerateOptions, EnumerationOutcome,
};
use twolevel_core::onelevel::{excursion_spec, DftVariance, OneLevelTest, TestSpec, EXCURSION_STATES};
use twolevel_core::twolevel::{NullKind, SecondLevelNull};

use crate::args::TestArgs;
use crate::error::{CliError, CliResult};

pub fn require_test(args: &TestArgs) -> CliResult<OneLevelTest> {
    args.resolved().ok_or_else(|| CliError::Usage("--test is required".into()))
}

/// Class specs for an exact or class-level computation; Random Excursions
/// needs a state unless `all_states`.
pub fn class_specs(test: OneLevelTest, n: u64, x: Option<i32>, all_states: bool) -> CliResult<Vec<TestSpec>> {
    match (test, x) {
        (OneLevelTest::RandomExcursions, Some(x)) => Ok(vec![excursion_spec(x)?]),
        (OneLevelTest::RandomExcursions, None) if !all_states => {
            Err(CliError::Usage("random-excursions needs --x (one of ±1..±4)".into()))
        }
        _ => Ok(test.class_specs(n)?),
    }
}

pub struct ExactOptions {
    pub budget: u64,
    pub long_run: bool,
    pub checkpoint: Option<PathBuf>,
    pub partitions: Option<usize>,
}

impl ExactOptions {
    pub fn with_budget(budget: u64, long_run: bool) -> Self {
        Self {
            budget,
            long_run,
            checkpoint: None,
            partitions: None,
        }
    }
}

fn with_n(mut d: CategoryDistribution, n: u64) -> CategoryDistribution {
    if !d.label.contains("n=") {
        d.label = format!("{}, n={n}", d.label);
    }
    d
}

/// Exact q by enumeration (class tests) or binomial scan (Frequency, DFT).
pub fn exact_distributions(
    test: OneLevelTest,
    n: u64,
    x: Option<i32>,
    nu: u32,
    opts: &ExactOptions,
) -> CliResult<Vec<CategoryDistribution>> {
    match test {
        OneLevelTest::Frequency => Ok(vec![binomial_scan_q(BinomialModel::Frequency, n, DftVariance::Sigma0, nu)?]),
        OneLevelTest::Dft { variance } => Ok(vec![binomial_scan_q(BinomialModel::Dft, n, variance, nu)?]),
        OneLevelTest::BlockFrequency { .. } => Err(CliError::Validation(
            "block-frequency has (m+1)^n_b outcomes and no exact enumeration; use mc-q".into(),
        )),
        _ => {
            let specs = class_specs(test, n, x, false)?;
            let mut out = Vec::new();
            for spec in specs {
                let enum_opts = EnumerateOptions {
                    partitions: opts.partitions.unwrap_or_else(rayon::current_num_threads),
                    budget: if opts.long_run { u128::MAX } else { opts.budget as u128 },
                    checkpoint: opts.checkpoint.clone(),
                    ..Default::default()
                };
                match enumerate_q_with(&spec, nu, &enum_opts)? {
                    EnumerationOutcome::Complete(d) => out.push(with_n(d, n)),
                    EnumerationOutcome::Interrupted { next_unit, .. } => {
                        return Err(CliError::Validation(format!(
                            "enumeration stopped at unit {next_unit}; rerun to resume"
                        )))
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Distributions in a file: a bare CategoryDistribution, a list of them, or
/// any output file of this tool whose result holds them.
pub fn load_distributions(path: &Path) -> CliResult<Vec<CategoryDistribution>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut found = Vec::new();
    collect(&value, &mut found);
    if found.is_empty() {
        return Err(CliError::Validation(format!("{} holds no category distribution", path.display())));
    }
    Ok(found)
}

fn collect(v: &serde_json::Value, out: &mut Vec<CategoryDistribution>) {
    if v.get("q").is_some() && v.get("provenance").is_some() {
        if let Ok(d) = serde_json::from_value::<CategoryDistribution>(v.clone()) {
            out.push(d);
            return;
        }
    }
    match v {
        serde_json::Value::Array(items) => items.iter().for_each(|i| collect(i, out)),
        serde_json::Value::Object(map) => {
            for key in ["result", "distribution", "distributions"] {
                if let Some(inner) = map.get(key) {
                    collect(inner, out);
                    return;
                }
            }
        }
        _ => {}
    }
}

/// One null per test channel from a list of distributions: one is shared,
/// four are the Random Excursions columns ±1..±4, eight are per state.
pub fn nulls_for(test: OneLevelTest, kind: NullKind, dists: &[CategoryDistribution]) -> CliResult<Vec<SecondLevelNull>> {
    let channels = test.channels();
    let pick: Vec<&CategoryDistribution> = match dists.len() {
        1 => vec![&dists[0]],
        4 if channels == 8 => EXCURSION_STATES.iter().map(|x| &dists[x.unsigned_abs() as usize - 1]).collect(),
        k if k == channels => dists.iter().collect(),
        k => {
            return Err(CliError::Validation(format!(
                "{k} distributions do not fit the {channels} channel(s) of {test}"
            )))
        }
    };
    pick.into_iter()
        .map(|d| Ok(SecondLevelNull::from_distribution(kind, d)?))
        .collect()
}
