use serde::Serialize;
use twolevel_core::discrepancy::{DiscrepancyReport, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE};
use twolevel_core::exactdist::{uniform, CategoryDistribution};

use super::{exact_distributions, require_test, ExactOptions};
use crate::args::ExactArgs;
use crate::error::CliResult;
use crate::output::{name_or, Output};

#[derive(Serialize)]
struct ExactResult {
    distributions: Vec<CategoryDistribution>,
    /// Against the uniform null; absent when δ = 0.
    limits: Vec<Option<DiscrepancyReport>>,
}

pub fn run(a: &ExactArgs, out: &Output) -> CliResult<()> {
    let test = require_test(&a.test)?;
    test.validate(a.test.n as usize)?;
    let opts = ExactOptions {
        budget: a.budget,
        long_run: a.long_run,
        checkpoint: a.checkpoint.clone().map(|p| out.path(&p)),
        partitions: a.partitions,
    };
    let dists = exact_distributions(test, a.test.n, a.test.x, a.test.nu, &opts)?;
    let limits = dists
        .iter()
        .map(|d| DiscrepancyReport::new(d, &uniform(d.nu), DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE).ok())
        .collect();
    for d in &dists {
        println!("{}", d.to_table());
    }
    let stem = format!("exact-q_{}", dists[0].label);
    let path = out.write_json(&name_or(&a.out, &stem, "json"), &[], ExactResult { distributions: dists, limits })?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
