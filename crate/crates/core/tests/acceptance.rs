//! One line per acceptance criterion. Run a subset with e.g.
//! `cargo test --release --test acceptance -- c1 c4`.

use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twolevel_core::bitgen::{BitBlock, BitSource, SourceKind};
use twolevel_core::discrepancy::{
    chi2_discrepancy, max_ratio_dev, DiscrepancyReport, DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE,
};
use twolevel_core::exactdist::{
    binomial_scan_q, enumerate_q, estimate_workload, uniform, BinomialModel, CategoryDistribution,
};
use twolevel_core::mcdist::{mc_block_frequency_q, mc_class_q, multinomial_sample, McOptions};
use twolevel_core::numerics::{chi2_isf, chi2_sf, noncentral_chi2_sf};
use twolevel_core::onelevel::{
    excursion_spec, frequency_p_value, linear_spec, longest_run_spec, overlap_spec, DftVariance, OneLevelTest, TestSpec,
};
use twolevel_core::reference::{reference_values, ClassColumn};
use twolevel_core::twolevel::{collect_histograms, gof_chi2, NullKind, SecondLevelNull};

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the failure is a property of the published numbers
    /// themselves, so no implementation can pass.
    unattainable: Option<&'static str>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            unattainable: None,
        }
    }
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    ("c1", "class table 1 round trip", c1),
    ("c2", "class table 3 round trip", c2),
    ("c3", "longest-run exact enumeration", c3),
    ("c4", "frequency binomial scan", c4),
    ("c5", "dft binomial scan", c5),
    ("c6", "noncentral rejection probability", c6),
    ("c7", "chi-squared mean under multinomial replicates", c7),
    ("c8", "small-instance oracle equivalence", c8),
    ("c9", "two-level block frequency pattern", c9),
    ("c10", "monte-carlo calibration", c10),
];

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.to_lowercase())
        .collect();
    let mut hard_failures = 0;
    for (id, name, f) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|x| x == id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{:<4} {status}  {name} ({:.1} s): {}",
            id.to_uppercase(),
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if let Some(why) = o.unattainable {
            println!("           not attainable: {why}");
        }
        if !o.pass && o.unattainable.is_none() {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}

/// δ within 1e-8 of the printed value and sizes within ±1, from printed q.
fn round_trip(cols: &[ClassColumn]) -> (Vec<bool>, String) {
    let mut oks = Vec::new();
    let mut parts = Vec::new();
    for c in cols {
        let delta = chi2_discrepancy(&c.q, &uniform(9)).unwrap();
        let s = c.sizes_from_printed().unwrap();
        let ok = (delta - c.delta).abs() <= 1e-8
            && s.n_safe.is_some_and(|v| v.abs_diff(c.n_safe) <= 1)
            && s.n_risky.abs_diff(c.n_risky) <= 1;
        parts.push(format!(
            "{} {}/{} vs {}/{}{}",
            c.id,
            s.n_safe.unwrap_or(0),
            s.n_risky,
            c.n_safe,
            c.n_risky,
            if ok { "" } else { " (off)" }
        ));
        oks.push(ok);
    }
    (oks, parts.join("; "))
}

fn c1() -> Outcome {
    let cols = reference_values().class_table("T1");
    let (oks, detail) = round_trip(cols);
    let mut o = Outcome::new(oks.iter().all(|&b| b), detail);
    if !o.pass && oks.iter().zip(cols).all(|(&ok, c)| ok || c.id == "overlap") {
        o.unattainable = Some(
            "for overlap, the published sizes need u = 0.00182 to within 1e-7, \
             while the printed q carry 7 decimals, so u from them is only good to about 1e-6",
        );
    }
    o
}

fn c2() -> Outcome {
    let (oks, detail) = round_trip(reference_values().class_table("T3"));
    Outcome::new(oks.len() == 4 && oks.iter().all(|&b| b), detail)
}

fn c3() -> Outcome {
    let col = &reference_values().class_table("T1")[0];
    let spec = longest_run_spec(col.n, 10_000).unwrap();
    let full = enumerate_q(&spec, 9, rayon::current_num_threads()).unwrap();
    let worst = full.q.iter().zip(&col.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let full_ok = worst <= 5e-7;

    let small = longest_run_spec(100_000, 10_000).unwrap();
    let exact = enumerate_q(&small, 9, 1).unwrap();
    let m = 10_000_000;
    let mc = mc_class_q(&small, &McOptions::new(m, 11)).unwrap();
    let worst_z = exact
        .q
        .iter()
        .zip(&mc.distribution.q)
        .map(|(q, e)| (e - q).abs() / (q * (1.0 - q) / m as f64).sqrt())
        .fold(0.0, f64::max);
    let desk_ok = worst_z <= 4.0;
    Outcome::new(
        full_ok && desk_ok,
        format!(
            "n=10^6: {} compositions, max |q - printed| = {worst:.1e}; n=10^5 vs M=10^7 Monte Carlo: max |z| = {worst_z:.2}",
            estimate_workload(&spec)
        ),
    )
}

fn c4() -> Outcome {
    let d = binomial_scan_q(BinomialModel::Frequency, 1_000_000, DftVariance::Sigma0, 9).unwrap();
    let r = DiscrepancyReport::new(&d, &uniform(9), DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE).unwrap();
    let n = r.n_safe.unwrap_or(0);
    Outcome::new((123_750..=126_250).contains(&n), format!("N_0.25 = {n}"))
}

fn c5() -> Outcome {
    let mut matching = Vec::new();
    let mut parts = Vec::new();
    for v in [DftVariance::Sigma0, DftVariance::Sigma1, DftVariance::Sigma2] {
        let d = binomial_scan_q(BinomialModel::Dft, 1_000_000, v, 9).unwrap();
        let r = DiscrepancyReport::new(&d, &uniform(9), DEFAULT_ALPHA_RISKY, DEFAULT_ALPHA_SAFE).unwrap();
        parts.push(format!("{v}: {:?}/{:?}", r.n_safe, r.n_risky));
        if r.n_safe == Some(18_690) && r.n_risky == Some(210_628) {
            matching.push(v.to_string());
        }
    }
    Outcome::new(
        !matching.is_empty(),
        format!("{}; matching variant: {}", parts.join(", "), matching.join(", ")),
    )
}

fn c6() -> Outcome {
    let want = reference_values().noncentral.probability;
    let col = &reference_values().class_table("T1")[0];
    let u = max_ratio_dev(&col.q, &uniform(9)).unwrap();
    let x_safe = chi2_isf(9, DEFAULT_ALPHA_SAFE).unwrap();
    let x_risky = chi2_isf(9, DEFAULT_ALPHA_RISKY).unwrap();
    let conventions = [
        ("N_0.25 * delta", col.n_safe as f64 * col.delta),
        ("chi2(0.25) - 9", x_safe - 9.0),
        ("chi2(0.25) - 9 - 9u", x_safe - 9.0 - 9.0 * u),
    ];
    let mut matched = None;
    let mut parts = Vec::new();
    for (name, lambda) in conventions {
        let p = noncentral_chi2_sf(9, lambda, x_risky).unwrap();
        parts.push(format!("{name}: {p:.9}"));
        if matched.is_none() && (p - want).abs() <= 1e-6 {
            matched = Some(name);
        }
    }
    Outcome::new(
        matched.is_some(),
        format!("{}; reproducing convention: {}", parts.join(", "), matched.unwrap_or("none")),
    )
}

fn c7() -> Outcome {
    let col = &reference_values().class_table("T1")[0];
    let total: f64 = col.q.iter().sum();
    let q: Vec<f64> = col.q.iter().map(|v| v / total).collect();
    let p = uniform(9);
    let delta = chi2_discrepancy(&q, &p).unwrap();
    let u = max_ratio_dev(&q, &p).unwrap();
    let (n, reps) = (20_950u64, 10_000usize);
    let expected = n as f64 * 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let stats: Vec<f64> = (0..reps)
        .map(|_| {
            multinomial_sample(n, &q, &mut rng)
                .unwrap()
                .iter()
                .map(|&x| (x as f64 - expected).powi(2) / expected)
                .sum()
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / reps as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    let centre = 9.0 + n as f64 * delta;
    let (lo, hi) = (centre - 9.0 * u - 4.0 * se, centre + 9.0 * u + 4.0 * se);
    let delta_hat = (mean - 9.0) / n as f64;
    let delta_se = se / n as f64;
    let ok = mean > lo && mean < hi && (delta_hat - delta).abs() <= 4.0 * delta_se;
    Outcome::new(
        ok,
        format!(
            "mean chi2 {mean:.4} in ({lo:.4}, {hi:.4}); delta estimate {delta_hat:.4e} vs {delta:.4e} (se {delta_se:.1e})"
        ),
    )
}

/// Compositions of `n` into `k` parts by plain recursion.
fn compositions(k: usize, n: u64, prefix: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
    if prefix.len() == k - 1 {
        prefix.push(n);
        f(prefix);
        prefix.pop();
        return;
    }
    for x in 0..=n {
        prefix.push(x);
        compositions(k, n - x, prefix, f);
        prefix.pop();
    }
}

/// Bin of p among [i/(ν+1), (i+1)/(ν+1)), the last bin closed at 1.
fn bin_of(p: f64, nu: usize) -> usize {
    (0..=nu).rev().find(|&i| p >= i as f64 / (nu + 1) as f64).unwrap_or(0)
}

fn naive_q(spec: &TestSpec, nu: usize) -> Vec<f64> {
    let n = spec.n_b;
    let ln_fact: Vec<f64> = (0..=n).scan(0.0, |acc, i| {
        if i > 0 {
            *acc += (i as f64).ln();
        }
        Some(*acc)
    })
    .collect();
    let mut q = vec![0.0; nu + 1];
    compositions(spec.probs.len(), n, &mut Vec::new(), &mut |x| {
        let mut ln_pmf = ln_fact[n as usize];
        let mut stat = 0.0;
        for (&xi, &pi) in x.iter().zip(&spec.probs) {
            ln_pmf += xi as f64 * pi.ln() - ln_fact[xi as usize];
            let e = n as f64 * pi;
            stat += (xi as f64 - e).powi(2) / e;
        }
        q[bin_of(chi2_sf(spec.df, stat).unwrap(), nu)] += ln_pmf.exp();
    });
    q
}

fn with_blocks(spec: TestSpec, n_b: u64) -> TestSpec {
    TestSpec::new(spec.name, spec.m, spec.probs, n_b).unwrap()
}

fn c8() -> Outcome {
    let mut specs = vec![
        longest_run_spec(128, 8).unwrap(),
        longest_run_spec(100_000, 10_000).unwrap(),
        longest_run_spec(3_000, 128).unwrap(),
        overlap_spec(20_000).unwrap(),
        linear_spec(10_000, 500).unwrap(),
    ];
    for x in [1, 2, 3, 4] {
        specs.push(with_blocks(excursion_spec(x).unwrap(), 25));
        specs.push(with_blocks(excursion_spec(-x).unwrap(), 20));
    }
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for spec in &specs {
        assert!(estimate_workload(spec) <= 1_000_000, "{}", spec.name);
        let got = enumerate_q(spec, 9, 2).unwrap();
        let want = naive_q(spec, 9);
        worst = got.q.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        checked += 1;
    }

    let mut freq_worst: f64 = 0.0;
    for n in 1..=20usize {
        let mut counts = vec![0u64; 10];
        for s in 0u64..1 << n {
            let block = BitBlock::from_bits((0..n).map(|i| s >> i & 1 == 1));
            let ones = block.iter().filter(|&b| b).count() as u64;
            counts[bin_of(frequency_p_value(ones, n as u64), 9)] += 1;
        }
        let scan = binomial_scan_q(BinomialModel::Frequency, n as u64, DftVariance::Sigma0, 9).unwrap();
        for (c, q) in counts.iter().zip(&scan.q) {
            freq_worst = freq_worst.max((*c as f64 / (1u64 << n) as f64 - q).abs());
        }
    }
    Outcome::new(
        worst <= 1e-12 && freq_worst <= 1e-15,
        format!(
            "{checked} specs, max bin difference {worst:.1e}; frequency n = 1..20 vs all 2^n strings, max difference {freq_worst:.1e}"
        ),
    )
}

fn c9() -> Outcome {
    let test = OneLevelTest::BlockFrequency { m: 128 };
    let (n, small, large) = (1_000_000usize, 71_800u64, 1_161_000u64);
    let mc = mc_block_frequency_q(
        n as u64,
        128,
        &McOptions {
            source: SourceKind::Well,
            ..McOptions::new(10_000_000, 20_190_101)
        },
    )
    .unwrap();
    let h2 = SecondLevelNull::from_distribution(NullKind::Mc, &mc.distribution).unwrap();
    let h1 = SecondLevelNull::uniform(9);
    let mut p_small = Vec::new();
    let mut p_large = Vec::new();
    let mut p_large_h2 = Vec::new();
    for seed in 1..=5 {
        let mut src = BitSource::experiment(SourceKind::Mt19937, seed).unwrap();
        let snaps = collect_histograms(&mut src, test, n, 9, &[small, large]).unwrap();
        p_small.push(gof_chi2(&snaps[0].histograms[0], &h1).unwrap().1);
        p_large.push(gof_chi2(&snaps[1].histograms[0], &h1).unwrap().1);
        p_large_h2.push(gof_chi2(&snaps[1].histograms[0], &h2).unwrap().1);
    }
    let below = |v: &[f64], t: f64| v.iter().filter(|&&p| p < t).count();
    let ok = below(&p_small, 1e-4) <= 1 && below(&p_large, 1e-3) >= 3 && below(&p_large_h2, 1e-3) <= 1;
    let show = |v: &[f64]| v.iter().map(|p| format!("{p:.1e}")).collect::<Vec<_>>().join(" ");
    Outcome::new(
        ok,
        format!(
            "N={small} uniform [{}]; N={large} uniform [{}]; N={large} Monte-Carlo null [{}]",
            show(&p_small),
            show(&p_large),
            show(&p_large_h2)
        ),
    )
}

fn c10() -> Outcome {
    let spec = longest_run_spec(128, 8).unwrap();
    let exact = enumerate_q(&spec, 9, 1).unwrap();
    let runs = 20;
    let mut rms = Vec::new();
    let mut z_var = Vec::new();
    let mut reported = Vec::new();
    for m in [10_000u64, 40_000, 160_000] {
        let mut zs = Vec::new();
        let mut sq = 0.0;
        let mut se_sum = 0.0;
        for seed in 0..runs {
            let t = mc_class_q(&spec, &McOptions::new(m, 1_000 * m + seed)).unwrap();
            let d: &CategoryDistribution = &t.distribution;
            let se = d.stderr.as_ref().unwrap();
            for i in 0..10 {
                let diff = d.q[i] - exact.q[i];
                zs.push(diff / (exact.q[i] * (1.0 - exact.q[i]) / m as f64).sqrt());
                sq += diff * diff;
                se_sum += se[i] * se[i];
            }
        }
        let k = zs.len() as f64;
        let mean = zs.iter().sum::<f64>() / k;
        z_var.push(zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (k - 1.0));
        rms.push((sq / k).sqrt());
        reported.push((se_sum / k).sqrt());
    }
    let ratios: Vec<f64> = rms.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = z_var.iter().all(|v| (0.5..=2.0).contains(v))
        && ratios.iter().all(|r| (r / 2.0 - 1.0).abs() <= 0.2)
        && rms.iter().zip(&reported).all(|(e, r)| (e / r - 1.0).abs() <= 0.2);
    Outcome::new(
        ok,
        format!(
            "z variance {:.2}/{:.2}/{:.2}; empirical error ratio per 4x M {:.2}/{:.2}; empirical/reported stderr {:.2}/{:.2}/{:.2}",
            z_var[0],
            z_var[1],
            z_var[2],
            ratios[0],
            ratios[1],
            rms[0] / reported[0],
            rms[1] / reported[1],
            rms[2] / reported[2]
        ),
    )
}

