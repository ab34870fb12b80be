use serde::Serialize;
use twolevel_core::discrepancy::{risky_safe_sizes, SampleSizes, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE};
use twolevel_core::mcdist::{mc_block_frequency_q, mc_class_q, mc_sequence_q, McOptions, McTrace};
use twolevel_core::onelevel::OneLevelTest;

use super::{class_specs, require_test};
use crate::args::McArgs;
use crate::error::{CliError, CliResult};
use crate::output::{name_or, slug, Output};

#[derive(Serialize)]
pub struct McResult<'a> {
    pub trace: &'a McTrace,
    /// Sizes from the plug-in δ and u.
    pub limits: Option<SampleSizes>,
}

pub fn estimate(test: OneLevelTest, n: u64, x: Option<i32>, sequence: bool, opts: &McOptions) -> CliResult<McTrace> {
    if opts.samples == 0 {
        return Err(CliError::Validation("--M must be at least 1".into()));
    }
    let trace = match test {
        OneLevelTest::BlockFrequency { m } if !sequence => mc_block_frequency_q(n, m as u64, opts)?,
        OneLevelTest::Frequency | OneLevelTest::Dft { .. } | OneLevelTest::BlockFrequency { .. } => {
            mc_sequence_q(test, n as usize, opts)?
        }
        _ if sequence => mc_sequence_q(test, n as usize, opts)?,
        _ => {
            let specs = class_specs(test, n, x, false)?;
            let mut t = mc_class_q(&specs[0], opts)?;
            t.distribution.label = format!("{}, n={n}", t.distribution.label);
            t
        }
    };
    Ok(trace)
}

pub fn print_summary(t: &McTrace) {
    println!("{}", t.distribution.to_table());
    println!(
        "M = {}  delta = {:.6e} (sd {:.3e}, plug-in bias {:.3e})  u = {:.6e} (sd {:.3e})",
        t.options.samples, t.delta, t.delta_sd, t.delta_bias, t.u, t.u_sd
    );
}

pub fn run(a: &McArgs, out: &Output) -> CliResult<()> {
    let test = require_test(&a.test)?;
    let opts = McOptions {
        samples: a.samples,
        nu: a.test.nu,
        streams: a.streams,
        checkpoint_every: a.checkpoint_every,
        source: a.source,
        seed: a.seed,
    };
    let trace = estimate(test, a.test.n, a.test.x, a.sequence, &opts)?;
    print_summary(&trace);
    let limits = risky_safe_sizes(trace.delta, trace.u, a.test.nu, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE).ok();
    if let Some(l) = &limits {
        println!(
            "N_safe = {}  N_risky = {}",
            l.n_safe.map_or("none".into(), |v| v.to_string()),
            l.n_risky
        );
    }
    let stem = format!("mc-q_{}", slug(&trace.distribution.label));
    let json = out.write_json(&name_or(&a.out.as_ref().map(|p| p.with_extension("json")), &stem, "json"), &trace.streams, McResult { trace: &trace, limits })?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let csv_path = out.write_text(
        &name_or(&a.out.as_ref().map(|p| p.with_extension("csv")), &stem, "csv"),
        &String::from_utf8(csv).expect("ascii csv"),
    )?;
    eprintln!("wrote {} and {}", json.display(), csv_path.display());
    Ok(())
}
