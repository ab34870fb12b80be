use rand_core::RngCore;
use twolevel_core::bitgen::{BitSource, SourceKind};
use twolevel_core::exactdist::{binomial_scan_q, enumerate_q, interval_index, BinomialModel};
use twolevel_core::mcdist::{
    mc_block_frequency_q, mc_class_q, mc_dft_q, multinomial_sample, run_mc, McOptions, Sampler,
};
use twolevel_core::numerics::{chi2_sf, igamc, log_multinomial_pmf};
use twolevel_core::onelevel::{longest_run_spec, DftVariance};
use twolevel_core::Result;

fn opts(samples: u64, seed: u64) -> McOptions {
    McOptions::new(samples, seed)
}

#[test]
fn multinomial_cell_means() {
    let mut src = BitSource::from_u64(SourceKind::Mt19937, 11).unwrap();
    let probs = [1.0 / 6.0; 6];
    let draws = 1_000_000u64;
    let mut sums = [0u64; 6];
    for _ in 0..draws {
        let x = multinomial_sample(6, &probs, &mut src).unwrap();
        assert_eq!(x.iter().sum::<u64>(), 6);
        for (s, v) in sums.iter_mut().zip(&x) {
            *s += v;
        }
    }
    // each cell count is Binom(6, 1/6); its mean over the draws has sd √(6·(1/6)(5/6)/draws)
    let sd = (6.0 * (1.0 / 6.0) * (5.0 / 6.0) / draws as f64).sqrt();
    for s in sums {
        let mean = s as f64 / draws as f64;
        assert!((mean - 1.0).abs() < 5.0 * sd, "{mean}");
    }
}

#[test]
fn multinomial_goodness_of_fit() {
    let probs = [0.2, 0.3, 0.5];
    let n = 5u64;
    let outcomes: Vec<[u64; 3]> = (0..=n)
        .flat_map(|a| (0..=n - a).map(move |b| [a, b, n - a - b]))
        .collect();
    let mut observed = vec![0u64; outcomes.len()];
    let mut src = BitSource::from_u64(SourceKind::Sha1g, 5).unwrap();
    let draws = 100_000u64;
    for _ in 0..draws {
        let x = multinomial_sample(n, &probs, &mut src).unwrap();
        let i = outcomes.iter().position(|o| o[..] == x[..]).unwrap();
        observed[i] += 1;
    }
    let mut chi2 = 0.0;
    for (o, &y) in outcomes.iter().zip(&observed) {
        let e = draws as f64 * log_multinomial_pmf(n, o, &probs).unwrap().exp();
        chi2 += (y as f64 - e).powi(2) / e;
    }
    let p = chi2_sf(outcomes.len() as u32 - 1, chi2).unwrap();
    assert!(p > 1e-4, "chi2 = {chi2}, p = {p}");
}

#[test]
fn class_estimate_agrees_with_enumeration() {
    let spec = longest_run_spec(100_000, 10_000).unwrap();
    let exact = enumerate_q(&spec, 9, 1).unwrap();
    let trace = mc_class_q(&spec, &opts(200_000, 3)).unwrap();
    let m = 200_000f64;
    for (i, (&q, &e)) in trace.distribution.q.iter().zip(&exact.q).enumerate() {
        let se = (e * (1.0 - e) / m).sqrt().max(1.0 / m);
        assert!((q - e).abs() <= 5.0 * se, "bin {i}: {q} vs {e}");
    }
}

/// m = 2, n_b = 2: each block has 0, 1 or 2 ones with weights 1:2:1, so
/// the nine (c1, c2) outcomes give the exact q.
fn block_frequency_small_exact() -> Vec<f64> {
    let w = [0.25, 0.5, 0.25];
    let mut q = vec![0.0; 10];
    for c1 in 0..3u32 {
        for c2 in 0..3u32 {
            let t: f64 = [c1, c2].iter().map(|&c| (2.0 * c as f64 - 2.0).powi(2) / 2.0).sum();
            let p = igamc(1.0, t / 2.0).unwrap();
            q[interval_index(p, 9)] += w[c1 as usize] * w[c2 as usize];
        }
    }
    q
}

#[test]
fn block_frequency_small_instance() {
    let exact = block_frequency_small_exact();
    let m = 100_000u64;
    let trace = mc_block_frequency_q(4, 2, &opts(m, 8)).unwrap();
    for (i, (&q, &e)) in trace.distribution.q.iter().zip(&exact).enumerate() {
        let se = (e * (1.0 - e) / m as f64).sqrt();
        assert!((q - e).abs() <= 5.0 * se, "bin {i}: {q} vs {e}");
        if e == 0.0 {
            assert_eq!(q, 0.0);
        }
    }
}

#[test]
fn stderr_scales_with_inverse_root_m() {
    let spec = longest_run_spec(100_000, 10_000).unwrap();
    let small = mc_class_q(&spec, &opts(10_000, 21)).unwrap();
    let large = mc_class_q(&spec, &opts(40_000, 22)).unwrap();
    let s = small.distribution.stderr.as_ref().unwrap();
    let l = large.distribution.stderr.as_ref().unwrap();
    for (a, b) in s.iter().zip(l) {
        if *a > 0.0 {
            let ratio = a / b;
            assert!((ratio - 2.0).abs() <= 0.4, "{ratio}");
        }
    }
}

#[test]
fn single_sample_is_an_indicator() {
    let trace = mc_dft_q(1024, DftVariance::Sigma0, &opts(1, 4)).unwrap();
    let q = &trace.distribution.q;
    assert_eq!(q.iter().filter(|&&x| x == 1.0).count(), 1);
    assert_eq!(q.iter().filter(|&&x| x == 0.0).count(), 9);
}

#[test]
fn traces_are_reproducible_and_well_formed() {
    let spec = longest_run_spec(100_000, 10_000).unwrap();
    let mut o = opts(12_345, 9);
    o.checkpoint_every = Some(1000);
    let a = mc_class_q(&spec, &o).unwrap();
    let b = mc_class_q(&spec, &o).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.counts.iter().sum::<u64>(), 12_345);
    assert!((a.distribution.q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    let ms: Vec<u64> = a.checkpoints.iter().map(|c| c.samples).collect();
    assert!(ms.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*ms.last().unwrap(), 12_345);
    assert_eq!(ms.len(), 13);
    o.seed = 10;
    assert_ne!(mc_class_q(&spec, &o).unwrap().counts, a.counts);

    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("M,delta,u,q0,q1,q2,q3,q4,q5,q6,q7,q8,q9\n"));
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn trace_prefix_is_independent_of_total() {
    // The first checkpoints only depend on the samples drawn so far.
    let spec = longest_run_spec(100_000, 10_000).unwrap();
    let mut short = opts(5_000, 31);
    short.checkpoint_every = Some(1_000);
    let mut long = short.clone();
    long.samples = 9_000;
    let a = mc_class_q(&spec, &short).unwrap();
    let b = mc_class_q(&spec, &long).unwrap();
    assert_eq!(a.checkpoints[..], b.checkpoints[..5]);
}

#[test]
fn rejects_invalid_options() {
    let spec = longest_run_spec(100_000, 10_000).unwrap();
    assert!(mc_class_q(&spec, &opts(0, 1)).is_err());
    let mut o = opts(10, 1);
    o.streams = 0;
    assert!(mc_class_q(&spec, &o).is_err());
}

struct UniformP;

impl Sampler for UniformP {
    type Scratch = ();
    fn scratch(&self) {}
    fn sample_p(&self, src: &mut BitSource, _: &mut ()) -> Result<f64> {
        Ok((src.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
    }
}

#[test]
fn delta_plug_in_bias_is_nu_over_m() {
    let m = 100_000u64;
    let runs = 100;
    let mut mean = 0.0;
    for seed in 0..runs {
        let t = run_mc(&UniformP, "uniform", &opts(m, 1000 + seed)).unwrap();
        mean += t.delta / runs as f64;
        assert!((t.delta_bias * m as f64 - 9.0).abs() < 0.1);
    }
    let want = 9.0 / m as f64;
    assert!((mean - want).abs() <= 0.2 * want, "{mean} vs {want}");
}

#[test]
fn jackknife_spread_is_reported() {
    let spec = longest_run_spec(100_000, 10_000).unwrap();
    let t = mc_class_q(&spec, &opts(50_000, 2)).unwrap();
    assert!(t.delta_sd > 0.0 && t.u_sd > 0.0);
    assert_eq!(t.streams.len(), 10);
}

#[test]
fn dft_small_n_model_gap() {
    // The binomial scan assumes independent Fourier magnitudes; at n = 64
    // this is visibly wrong, so the gap is only printed.
    let scan = binomial_scan_q(BinomialModel::Dft, 64, DftVariance::Sigma0, 9).unwrap();
    let mc = mc_dft_q(64, DftVariance::Sigma0, &opts(100_000, 6)).unwrap();
    let gap: f64 = scan.q.iter().zip(&mc.distribution.q).map(|(a, b)| (a - b).abs()).sum();
    eprintln!("dft n=64: scan {:?}\n          mc   {:?}\n          L1 gap {gap:.4}", scan.q, mc.distribution.q);
    assert!(gap.is_finite());
}
