use twolevel_core::bitgen::{BitSource, Derivation, SourceKind};
use twolevel_core::onelevel::OneLevelTest;
use twolevel_core::twolevel::{collect_histograms, NullKind, SecondLevelNull, TwoLevelResult};

use super::{exact_distributions, load_distributions, nulls_for, require_test, ExactOptions};
use crate::args::TwoLevelArgs;
use crate::error::{CliError, CliResult};
use crate::output::{name_or, Output};

/// Nulls from `uniform`, `exact`, `exact:<file>` or `mc:<file>`.
pub fn parse_null(spec: &str, test: OneLevelTest, n: u64, nu: u32, budget: u64) -> CliResult<Vec<SecondLevelNull>> {
    let (kind, file) = match spec.split_once(':') {
        Some((k, f)) => (k, Some(f)),
        None => (spec, None),
    };
    let kind: NullKind = kind.parse().map_err(|_| CliError::Usage(format!("bad --null {spec:?}")))?;
    match (kind, file) {
        (NullKind::Uniform, _) => Ok(vec![SecondLevelNull::uniform(nu)]),
        (_, Some(f)) if !f.is_empty() => nulls_for(test, kind, &load_distributions(f.as_ref())?),
        (NullKind::Exact, _) => {
            let dists = if test == OneLevelTest::RandomExcursions {
                (1..=4)
                    .map(|x| exact_distributions(test, n, Some(x), nu, &ExactOptions::with_budget(budget, false)))
                    .collect::<CliResult<Vec<_>>>()?
                    .concat()
            } else {
                exact_distributions(test, n, None, nu, &ExactOptions::with_budget(budget, false))?
            };
            nulls_for(test, kind, &dists)
        }
        (NullKind::Mc, _) => Err(CliError::Io(format!("--null {spec:?} needs a distribution file"))),
    }
}

/// One two-level run per source, in order.
pub fn run_sources(
    sources: Vec<BitSource>,
    test: OneLevelTest,
    n: usize,
    big_n: u64,
    nulls: &[SecondLevelNull],
    significance: f64,
) -> CliResult<Vec<TwoLevelResult>> {
    let nu = nulls[0].nu();
    sources
        .into_iter()
        .map(|mut src| {
            let derivation = src.derivation().clone();
            let hists = collect_histograms(&mut src, test, n, nu, &[big_n])?;
            Ok(TwoLevelResult::evaluate(&hists[0], nulls, significance, derivation)?)
        })
        .collect()
}

pub fn sources(kind: SourceKind, first_seed: u64, count: u64) -> CliResult<Vec<BitSource>> {
    (0..count)
        .map(|i| Ok(BitSource::experiment(kind, first_seed + i)?))
        .collect()
}

pub fn run(a: &TwoLevelArgs, out: &Output) -> CliResult<()> {
    let test = require_test(&a.test)?;
    if a.seeds == 0 || a.big_n == 0 {
        return Err(CliError::Validation("--seeds and --N must be positive".into()));
    }
    let nulls = parse_null(&a.null, test, a.test.n, a.test.nu, a.budget)?;
    let srcs = if a.source == SourceKind::File {
        let input = a
            .input
            .as_ref()
            .ok_or_else(|| CliError::Usage("--gen file needs --input".into()))?;
        let root = BitSource::from_file(input, a.format.into())?;
        if a.seeds == 1 {
            vec![root]
        } else {
            root.jump_streams(a.seeds as usize)
        }
    } else {
        sources(a.source, a.seed, a.seeds)?
    };
    let results = run_sources(srcs, test, a.test.n as usize, a.big_n, &nulls, a.significance)?;
    for r in &results {
        println!("{}", r.to_table());
    }
    let seeds: Vec<Derivation> = results.iter().map(|r| r.source.clone()).collect();
    let stem = format!("two-level_{test}_{}_N{}_{}", a.source.name(), a.big_n, a.null.split(':').next().unwrap_or("null"));
    let path = out.write_json(&name_or(&a.out, &stem, "json"), &seeds, &results)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
