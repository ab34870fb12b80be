use proptest::prelude::*;
use twolevel_core::bitgen::{BitBlock, BitSource, SourceKind};
use twolevel_core::onelevel::*;

fn block(seed: u64, n: usize) -> BitBlock {
    BitSource::from_u64(SourceKind::SplitStream, seed).unwrap().next_block(n).unwrap()
}

/// Statistic recomputed in two passes: expected counts first, then the sum
/// of squared deviations in extended form (X² / e − 2X + e).
fn two_pass_statistic(counts: &[u64], probs: &[f64], n_b: u64) -> f64 {
    let expected: Vec<f64> = probs.iter().map(|p| p * n_b as f64).collect();
    counts
        .iter()
        .zip(&expected)
        .map(|(&x, &e)| (x as f64) * (x as f64) / e - 2.0 * x as f64 + e)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn block_frequency_statistic_matches_per_block_counting(seed in any::<u64>(), m in 1usize..300) {
        let b = block(seed, 20_000);
        let n_b = b.len() / m;
        let mut t = 0.0;
        for i in 0..n_b {
            let ones = (i * m..(i + 1) * m).filter(|&j| b.bit(j)).count() as f64;
            t += (ones / m as f64 - 0.5).powi(2);
        }
        t *= 4.0 * m as f64;
        let got = block_frequency_statistic(&block_ones(&b, m), m as u64);
        prop_assert!((got - t).abs() <= 1e-10 * t.max(1.0));
    }

    #[test]
    fn class_statistics_match_two_pass_oracle(seed in any::<u64>()) {
        let b = block(seed, 100_000);
        let cases: Vec<(Vec<u64>, TestSpec)> = vec![
            (longest_run_counts(&b, 128).unwrap(), longest_run_spec(100_000, 128).unwrap()),
            (overlap_counts(&b), overlap_spec(100_000).unwrap()),
            (linear_counts(&b, 500), linear_spec(100_000, 500).unwrap()),
        ];
        for (counts, spec) in cases {
            prop_assert_eq!(counts.iter().sum::<u64>(), spec.n_b);
            let a = chi2_class_statistic(&counts, &spec);
            let o = two_pass_statistic(&counts, &spec.probs, spec.n_b);
            prop_assert!((a - o).abs() <= 1e-10 * a.max(1.0), "{} {} vs {}", spec.name, a, o);
        }
    }

    #[test]
    fn p_values_lie_in_unit_interval(seed in any::<u64>()) {
        let b = block(seed, 20_000);
        let tests = [
            OneLevelTest::Frequency,
            OneLevelTest::BlockFrequency { m: 128 },
            OneLevelTest::LongestRun { m: 128 },
            OneLevelTest::OverlappingTemplate,
            OneLevelTest::LinearComplexity { m: 500 },
            OneLevelTest::RandomExcursions,
            OneLevelTest::Dft { variance: DftVariance::Sigma1 },
        ];
        for t in tests {
            if let Some(ps) = t.evaluate(&b).unwrap() {
                prop_assert_eq!(ps.len(), t.channels());
                prop_assert!(ps.iter().all(|p| (0.0..=1.0).contains(p)), "{}: {:?}", t, ps);
            }
        }
    }
}

#[test]
fn longest_run_on_megabit_uses_hundred_blocks() {
    let b = block(1, 1_000_000);
    let counts = longest_run_counts(&b, 10_000).unwrap();
    assert_eq!(counts.iter().sum::<u64>(), 100);
    let p = longest_run_test(&b, 10_000).unwrap();
    assert!((0.0..=1.0).contains(&p));
}
