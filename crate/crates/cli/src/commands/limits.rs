use twolevel_core::discrepancy::{chi2_discrepancy, max_ratio_dev, DiscrepancyReport};
use twolevel_core::exactdist::uniform;

use super::{exact_distributions, load_distributions, ExactOptions};
use crate::args::LimitsArgs;
use crate::error::{CliError, CliResult};
use crate::output::{name_or, Output};

pub fn run(a: &LimitsArgs, out: &Output) -> CliResult<()> {
    let dists = match (&a.dist, a.test.resolved()) {
        (Some(path), _) => load_distributions(path)?,
        (None, Some(test)) => exact_distributions(
            test,
            a.test.n,
            a.test.x,
            a.test.nu,
            &ExactOptions::with_budget(a.budget, a.long_run),
        )?,
        (None, None) => return Err(CliError::Usage("give --dist <file> or --test".into())),
    };
    let mut reports = Vec::new();
    let mut zero = false;
    for d in &dists {
        let p = uniform(d.nu);
        let delta = match a.delta {
            Some(v) => v,
            None => chi2_discrepancy(&d.q, &p)?,
        };
        let u = max_ratio_dev(&d.q, &p)?;
        let report = DiscrepancyReport::from_parts(&d.label, d.provenance, delta, u, d.nu, a.alpha_risky, a.alpha_safe)?;
        println!("{}", report.to_table());
        zero |= report.n_risky.is_none();
        reports.push(report);
    }
    let stem = format!("limits_{}", dists[0].label);
    let path = out.write_json(&name_or(&a.out, &stem, "json"), &[], &reports)?;
    eprintln!("wrote {}", path.display());
    if zero {
        return Err(CliError::Validation("no finite limits (delta = 0)".into()));
    }
    Ok(())
}
