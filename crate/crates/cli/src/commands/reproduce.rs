use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use twolevel_core::bitgen::SourceKind;
use twolevel_core::discrepancy::{
    chi2_discrepancy, group_thousands, DiscrepancyReport, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE,
};
use twolevel_core::exactdist::{
    binomial_scan_q, enumerate_q_with, estimate_workload, uniform, BinomialModel, CategoryDistribution,
    EnumerateOptions, EnumerationOutcome, Provenance,
};
use twolevel_core::mcdist::{mc_class_q, McOptions, McTrace};
use twolevel_core::onelevel::{excursion_spec, DftVariance, OneLevelTest};
use twolevel_core::reference::{reference_values, ClassColumn, McReference, TwoLevelRow};
use twolevel_core::twolevel::{NullKind, SecondLevelNull, TwoLevelResult};

use super::mc::estimate;
use super::nulls_for;
use super::two_level::{run_sources, sources};
use crate::args::{ReproduceArgs, Scale};
use crate::error::{CliError, CliResult};
use crate::output::Output;

const EXACT_TOLERANCE: f64 = 5e-7;

pub fn run(a: &ReproduceArgs, out: &Output) -> CliResult<()> {
    let upper = a.table.trim().to_ascii_uppercase();
    let table = upper.strip_prefix("QUALITATIVE:").unwrap_or(&upper).to_string();
    let (text, json) = match table.as_str() {
        "T1" | "T3" => {
            let r = class_table(&table, a)?;
            (r.0, serde_json::to_value(r.1))
        }
        "T8-LIMITS" => {
            let r = dft_limits()?;
            (r.0, serde_json::to_value(r.1))
        }
        "F1" | "F2" | "F3" | "F4" | "F5" | "F6" => {
            let (text, report, trace) = figure(&table, a)?;
            let mut csv = Vec::new();
            trace.write_csv(&mut csv)?;
            let path = out.write_text(&PathBuf::from(format!("reproduce_{table}.csv")), &String::from_utf8(csv).expect("ascii"))?;
            eprintln!("wrote {}", path.display());
            (text, serde_json::to_value(report))
        }
        "T11" => {
            let r = mc_table(a)?;
            (r.0, serde_json::to_value(r.1))
        }
        "T2" | "T4" | "T5" | "T6" | "T7" | "T8" | "T9" | "T10" | "T12" => {
            let r = qualitative(&table, a)?;
            (r.0, serde_json::to_value(r.1))
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown table {:?}; expected T1, T3, T8-limits, F1..F6, T11 or qualitative:T2, T4..T10, T12",
                a.table
            )))
        }
    };
    print!("{text}");
    let json = json.map_err(|e| CliError::Io(e.to_string()))?;
    let path = out.write_json(&PathBuf::from(format!("reproduce_{}.json", table.to_lowercase())), &[], json)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "match"
    } else {
        "MISMATCH"
    }
}

#[derive(Serialize)]
struct ColumnReport {
    id: String,
    test: OneLevelTest,
    x: Option<i32>,
    method: Provenance,
    workload: String,
    samples: Option<u64>,
    q: Vec<f64>,
    q_printed: Vec<f64>,
    q_tolerance: Vec<f64>,
    q_match: bool,
    delta_computed: f64,
    delta_printed: f64,
    sizes_printed: (u64, u64),
    /// From the printed δ and u recomputed from the printed q.
    sizes_round_trip: (Option<u64>, u64),
    sizes_match: bool,
}

fn column_spec(col: &ClassColumn) -> CliResult<twolevel_core::onelevel::TestSpec> {
    Ok(match col.x {
        Some(x) => excursion_spec(x)?,
        None => col.test.class_specs(col.n)?.remove(0),
    })
}

fn class_table(name: &str, a: &ReproduceArgs) -> CliResult<(String, Vec<ColumnReport>)> {
    let cols: Vec<&ClassColumn> = reference_values()
        .class_table(name)
        .iter()
        .filter(|c| a.x.is_none_or(|x| c.x == Some(x.abs())))
        .collect();
    if cols.is_empty() {
        return Err(CliError::Usage(format!("no column of {name} matches --x")));
    }
    let mut reports = Vec::new();
    let mut text = String::new();
    for col in cols {
        let spec = column_spec(col)?;
        let workload = estimate_workload(&spec);
        let within = workload <= a.budget as u128;
        if !within && a.scale == Scale::Full && !a.long_run {
            return Err(CliError::Validation(format!(
                "full-scale {} needs {workload} compositions (budget {}); add --long-run",
                col.id, a.budget
            )));
        }
        let (dist, samples, tolerance) = if within || a.long_run {
            let opts = EnumerateOptions {
                budget: u128::MAX,
                ..Default::default()
            };
            let EnumerationOutcome::Complete(d) = enumerate_q_with(&spec, 9, &opts)? else {
                unreachable!("no stop requested")
            };
            (d, None, vec![EXACT_TOLERANCE; 10])
        } else {
            let m = a.samples.unwrap_or(1_000_000);
            let t = mc_class_q(&spec, &McOptions::new(m, a.seed))?;
            let tol = t.distribution.q.iter().map(|&q| 4.0 * (q * (1.0 - q) / m as f64).sqrt() + 5e-8).collect();
            (t.distribution, Some(m), tol)
        };
        let q_match = dist
            .q
            .iter()
            .zip(&col.q)
            .zip(&tolerance)
            .all(|((a, b), t)| (a - b).abs() <= *t);
        let rt = col.sizes_from_printed()?;
        let sizes_match = rt.n_safe.is_some_and(|s| s.abs_diff(col.n_safe) <= 1) && rt.n_risky.abs_diff(col.n_risky) <= 1;
        let delta_computed = chi2_discrepancy(&dist.q, &uniform(9))?;
        let _ = writeln!(
            text,
            "{:<10} {:<24} {:>12} q {:<8} ({}{})  delta {:.6e} vs {:.6e}  sizes {}/{} vs {}/{} {}",
            col.id,
            col.test.to_string(),
            if samples.is_some() { "monte-carlo" } else { "exact" },
            flag(q_match),
            if samples.is_some() { "M = " } else { "compositions " },
            samples.map_or(group_thousands(workload.min(u64::MAX as u128) as u64), group_thousands),
            delta_computed,
            col.delta,
            rt.n_safe.map_or("-".into(), group_thousands),
            group_thousands(rt.n_risky),
            group_thousands(col.n_safe),
            group_thousands(col.n_risky),
            flag(sizes_match)
        );
        reports.push(ColumnReport {
            id: col.id.clone(),
            test: col.test,
            x: col.x,
            method: if samples.is_some() { Provenance::MonteCarlo } else { Provenance::Exact },
            workload: workload.to_string(),
            samples,
            q: dist.q,
            q_printed: col.q.clone(),
            q_tolerance: tolerance,
            q_match,
            delta_computed,
            delta_printed: col.delta,
            sizes_printed: (col.n_safe, col.n_risky),
            sizes_round_trip: (rt.n_safe, rt.n_risky),
            sizes_match,
        });
    }
    Ok((text, reports))
}

#[derive(Serialize)]
struct LimitReport {
    test: OneLevelTest,
    report: DiscrepancyReport,
    expected: String,
    matches: bool,
}

fn dft_limits() -> CliResult<(String, Vec<LimitReport>)> {
    let refs = reference_values();
    let mut text = String::new();
    let mut out = Vec::new();
    let dft = refs.binomial_limit("dft").expect("bundled dft limits");
    for v in [DftVariance::Sigma0, DftVariance::Sigma1, DftVariance::Sigma2] {
        let d = binomial_scan_q(BinomialModel::Dft, dft.n, v, 9)?;
        let report = DiscrepancyReport::new(&d, &uniform(9), DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE)?;
        let matches = report.n_safe == dft.n_safe && report.n_risky == dft.n_risky;
        let _ = writeln!(
            text,
            "dft {v:<7} N_safe {:>9} N_risky {:>9}  expected {}/{}  {}",
            report.n_safe.map_or("-".into(), group_thousands),
            report.n_risky.map_or("-".into(), group_thousands),
            dft.n_safe.map_or("-".into(), group_thousands),
            dft.n_risky.map_or("-".into(), group_thousands),
            if matches { "match (this variant)" } else { "differs" }
        );
        out.push(LimitReport {
            test: OneLevelTest::Dft { variance: v },
            report,
            expected: format!("{:?}/{:?}", dft.n_safe, dft.n_risky),
            matches,
        });
    }
    let freq = refs.binomial_limit("frequency").expect("bundled frequency limit");
    let d = binomial_scan_q(BinomialModel::Frequency, freq.n, DftVariance::Sigma0, 9)?;
    let report = DiscrepancyReport::new(&d, &uniform(9), DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE)?;
    let approx = freq.n_safe_approx.unwrap_or(0) as f64;
    let tol = freq.relative_tolerance.unwrap_or(0.01);
    let matches = report.n_safe.is_some_and(|s| (s as f64 - approx).abs() <= tol * approx);
    let _ = writeln!(
        text,
        "frequency N_safe {:>9}  expected about {} (±{}%)  {}",
        report.n_safe.map_or("-".into(), group_thousands),
        group_thousands(approx as u64),
        tol * 100.0,
        flag(matches)
    );
    out.push(LimitReport {
        test: OneLevelTest::Frequency,
        report,
        expected: format!("≈{approx}"),
        matches,
    });
    Ok((text, out))
}

#[derive(Serialize)]
struct FigureReport {
    figure: String,
    /// "delta" for F1, F3, F5 and "u" for F2, F4, F6.
    quantity: &'static str,
    reference: McReference,
    samples: u64,
    delta: f64,
    delta_bias: f64,
    delta_sd: f64,
    /// (δ̂ − bias − δ_ref)/sd.
    delta_z: f64,
    u: f64,
    u_sd: f64,
    u_z: f64,
    /// Largest u any q with the reference δ can have: √(δ_ref / min p).
    u_bound: f64,
    consistent: bool,
}

fn figure_reference(fig: &str) -> &'static McReference {
    let id = match fig {
        "F1" | "F2" => "linear-500",
        "F3" | "F4" => "block-frequency",
        _ => "dft",
    };
    reference_values().monte_carlo(id).expect("bundled Monte-Carlo reference")
}

fn figure_samples(r: &McReference, a: &ReproduceArgs) -> CliResult<u64> {
    let desk = if r.id == "dft" { 1_000 } else { 1_000_000 };
    match (a.samples, a.scale) {
        (Some(m), _) => Ok(m),
        (None, Scale::Desk) => Ok(desk),
        (None, Scale::Full) if a.long_run => Ok(r.samples.map_or(10_000_000_000, |s| s as u64)),
        (None, Scale::Full) => Err(CliError::Validation(format!(
            "full-scale {} needs M = {}; add --long-run",
            r.id,
            r.samples.map_or("1e10 or more".into(), |s| format!("{s:e}"))
        ))),
    }
}

fn figure(fig: &str, a: &ReproduceArgs) -> CliResult<(String, FigureReport, McTrace)> {
    let r = figure_reference(fig);
    let m = figure_samples(r, a)?;
    let t = estimate(r.test, r.n, None, false, &McOptions::new(m, a.seed))?;
    let delta_sd = t.delta_sd.max(r.delta_sd);
    let u_sd = t.u_sd.max(r.u_sd);
    let delta_z = (t.delta - t.delta_bias - r.delta) / delta_sd;
    let u_z = (t.u - r.u) / u_sd;
    let u_bound = (r.delta / 0.1).sqrt();
    let quantity = if matches!(fig, "F1" | "F3" | "F5") { "delta" } else { "u" };
    let consistent = if quantity == "delta" { delta_z.abs() <= 4.0 } else { u_z.abs() <= 4.0 };
    let mut text = if quantity == "delta" {
        format!(
            "{fig} {}: M = {}  delta {:.4e} - bias {:.3e} = {:.4e} (sd {:.3e}) vs {:.4e}, z = {:.2}",
            r.test,
            group_thousands(m),
            t.delta,
            t.delta_bias,
            t.delta - t.delta_bias,
            delta_sd,
            r.delta,
            delta_z
        )
    } else {
        format!(
            "{fig} {}: M = {}  u {:.4e} (sd {:.3e}) vs {:.4e}, z = {:.2}",
            r.test,
            group_thousands(m),
            t.u,
            u_sd,
            r.u,
            u_z
        )
    };
    text.push_str(if consistent { "   consistent\n" } else { "   INCONSISTENT\n" });
    if quantity == "u" && r.u > u_bound {
        text.push_str(&format!(
            "   note: the reference u exceeds sqrt(delta/min p) = {u_bound:.4e}, the largest u compatible with the reference delta\n"
        ));
    }
    let report = FigureReport {
        figure: fig.into(),
        quantity,
        reference: r.clone(),
        samples: m,
        delta: t.delta,
        delta_bias: t.delta_bias,
        delta_sd,
        delta_z,
        u: t.u,
        u_sd,
        u_z,
        u_bound,
        consistent,
    };
    Ok((text, report, t))
}

#[derive(Serialize)]
struct McTableReport {
    id: String,
    samples: u64,
    q: Vec<f64>,
    q_printed: Vec<f64>,
    q_tolerance: Vec<f64>,
    q_match: bool,
}

fn mc_table(a: &ReproduceArgs) -> CliResult<(String, Vec<McTableReport>)> {
    let mut text = String::new();
    let mut out = Vec::new();
    for fig in ["F1", "F3", "F5"] {
        let r = figure_reference(fig);
        let m = figure_samples(r, a)?;
        let t = estimate(r.test, r.n, None, false, &McOptions::new(m, a.seed))?;
        // The DFT column is printed to 4 decimals, the others to 5.
        let rounding = if r.id == "dft" { 5e-5 } else { 5e-6 };
        let tol: Vec<f64> = r.q.iter().map(|&q| 4.0 * (q * (1.0 - q) / m as f64).sqrt() + rounding).collect();
        let q_match = t.distribution.q.iter().zip(&r.q).zip(&tol).all(|((a, b), t)| (a - b).abs() <= *t);
        let _ = writeln!(text, "{:<16} M = {:>12}  q' {}", r.id, group_thousands(m), flag(q_match));
        out.push(McTableReport {
            id: r.id.clone(),
            samples: m,
            q: t.distribution.q.clone(),
            q_printed: r.q.clone(),
            q_tolerance: tol,
            q_match,
        });
    }
    Ok((text, out))
}

#[derive(Serialize)]
struct RowReport {
    row: TwoLevelRow,
    ran: bool,
    note: Option<String>,
    /// Second-level p-values per seed (the row's channel).
    p: Vec<f64>,
    /// Per seed, channels rejected at the significance level.
    rejections: Vec<Vec<(String, f64)>>,
    below_1e4: (usize, usize),
    below_1e3: (usize, usize),
}

/// Rough single-core nanoseconds per input bit.
fn cost_per_bit(test: OneLevelTest, gen: SourceKind) -> f64 {
    let eval = match test {
        OneLevelTest::Frequency | OneLevelTest::BlockFrequency { .. } => 0.03,
        OneLevelTest::LongestRun { m } if m < 64 => 2.3,
        OneLevelTest::LongestRun { .. } => 0.35,
        OneLevelTest::OverlappingTemplate | OneLevelTest::RandomExcursions => 1.8,
        OneLevelTest::LinearComplexity { m } => 10.0 + 0.03 * m as f64,
        OneLevelTest::Dft { .. } => 28.0,
    };
    let gen = match gen {
        SourceKind::Sha1g => 2.5,
        _ => 0.1,
    };
    eval + gen
}

fn reference_null(row: &TwoLevelRow) -> CliResult<Vec<SecondLevelNull>> {
    let refs = reference_values();
    let dist = |q: &[f64], label: &str, provenance| {
        let mut d = CategoryDistribution::new(label, q.to_vec(), provenance)?;
        d.mass_accounted = q.iter().sum();
        Ok::<_, twolevel_core::Error>(d)
    };
    match row.null {
        NullKind::Uniform => Ok(vec![SecondLevelNull::uniform(9)]),
        NullKind::Exact if row.test == OneLevelTest::RandomExcursions => {
            let cols = refs
                .class_table("T3")
                .iter()
                .map(|c| dist(&c.q, &format!("printed random-excursions x=±{}", c.x.unwrap_or(0)), Provenance::Reference))
                .collect::<Result<Vec<_>, _>>()?;
            nulls_for(row.test, NullKind::Exact, &cols)
        }
        NullKind::Exact => {
            let col = refs
                .class_table("T1")
                .iter()
                .find(|c| c.test == row.test)
                .ok_or_else(|| CliError::Validation(format!("no printed q for {}", row.test)))?;
            nulls_for(row.test, NullKind::Exact, &[dist(&col.q, &format!("printed {}", col.test), Provenance::Reference)?])
        }
        NullKind::Mc => {
            let r = refs
                .monte_carlo
                .iter()
                .find(|m| m.test == row.test)
                .ok_or_else(|| CliError::Validation(format!("no printed q' for {}", row.test)))?;
            nulls_for(row.test, NullKind::Mc, &[dist(&r.q, &format!("printed q' {}", r.test), Provenance::Reference)?])
        }
    }
}

fn qualitative(table: &str, a: &ReproduceArgs) -> CliResult<(String, Vec<RowReport>)> {
    let rows: Vec<&TwoLevelRow> = reference_values()
        .two_level_rows(table)
        .filter(|r| a.x.is_none_or(|x| r.x.is_none_or(|rx| rx.abs() == x.abs())))
        .collect();
    let threads = rayon::current_num_threads() as f64;
    let mut cache: HashMap<(String, String, u64, NullKind), Vec<TwoLevelResult>> = HashMap::new();
    let mut reports = Vec::new();
    let mut text = String::new();
    for row in rows {
        let gen: SourceKind = row.gen.parse()?;
        let n = 1_000_000u64;
        let seconds = a.seeds as f64 * row.big_n as f64 * n as f64 * cost_per_bit(row.test, gen) * 1e-9 / threads;
        let key = (row.test.to_string(), row.gen.clone(), row.big_n, row.null);
        let mut note = None;
        if !cache.contains_key(&key) {
            if seconds > a.time_budget && !a.long_run {
                if a.scale == Scale::Full {
                    return Err(CliError::Validation(format!(
                        "{} {} N = {} needs about {seconds:.0} s; add --long-run",
                        row.test, row.gen, row.big_n
                    )));
                }
                note = Some(format!("skipped: about {seconds:.0} s at this scale (time budget {} s)", a.time_budget));
            } else {
                let nulls = reference_null(row)?;
                let results = run_sources(sources(gen, a.seed, a.seeds)?, row.test, n as usize, row.big_n, &nulls, 1e-4)?;
                cache.insert(key.clone(), results);
            }
        }
        let (p, rejections) = match cache.get(&key) {
            Some(results) => {
                let label = row.x.map(|x| format!("x={x}"));
                let p = results
                    .iter()
                    .filter_map(|r| {
                        r.channels
                            .iter()
                            .find(|c| label.as_ref().is_none_or(|l| &c.label == l))
                            .map(|c| c.p_second)
                    })
                    .collect();
                let rej = results
                    .iter()
                    .map(|r| r.channels.iter().filter(|c| c.rejected).map(|c| (c.label.clone(), c.p_second)).collect())
                    .collect();
                (p, rej)
            }
            None => (Vec::new(), Vec::new()),
        };
        let published: Vec<f64> = row.p.clone().unwrap_or_else(|| {
            row.rejections
                .as_ref()
                .map(|r| r.iter().map(|s| s.iter().map(|x| x.1).fold(1.0, f64::min)).collect())
                .unwrap_or_default()
        });
        let count = |v: &[f64], t: f64| v.iter().filter(|&&p| p < t).count();
        let below_1e4 = (count(&p, 1e-4), count(&published, 1e-4));
        let below_1e3 = (count(&p, 1e-3), count(&published, 1e-3));
        let shown: Vec<String> = p.iter().map(|v| format!("{v:.2e}")).collect();
        let _ = writeln!(
            text,
            "{:<4}{:<24}{:>6}{:>5} {:<8}N = {:>11}  {}",
            row.table,
            row.test.to_string(),
            row.x.map_or(String::new(), |x| format!("x={x}")),
            row.gen,
            row.null.to_string(),
            group_thousands(row.big_n),
            match &note {
                Some(s) => s.clone(),
                None => format!(
                    "[{}]  <1e-4: {}/{} (published {}/{})",
                    shown.join(" "),
                    below_1e4.0,
                    p.len(),
                    below_1e4.1,
                    published.len()
                ),
            }
        );
        reports.push(RowReport {
            row: row.clone(),
            ran: note.is_none(),
            note,
            p,
            rejections,
            below_1e4,
            below_1e3,
        });
    }
    Ok((text, reports))
}
