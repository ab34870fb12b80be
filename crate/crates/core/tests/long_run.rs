//! Full-scale enumerations. Ignored by default; run with
//! `cargo test --release --test long_run -- --ignored --nocapture`.

use std::time::Instant;

use twolevel_core::exactdist::enumerate_q;
use twolevel_core::onelevel::longest_run_spec;

/// Published q for the Longest Run test at n = 10⁶, m = 10⁴.
const LONGEST_Q: [f64; 10] = [
    0.0984739, 0.0993067, 0.1003668, 0.1008263, 0.1011301, 0.1010720, 0.1007868, 0.1004239, 0.0994782, 0.0981354,
];

#[test]
#[ignore]
fn longest_run_megabit_enumeration() {
    let n: u64 = std::env::var("LONGEST_N").ok().and_then(|v| v.parse().ok()).unwrap_or(1_000_000);
    let spec = longest_run_spec(n, 10_000).unwrap();
    let start = Instant::now();
    let d = enumerate_q(&spec, 9, rayon::current_num_threads()).unwrap();
    println!("n = {n}: {:.1} s", start.elapsed().as_secs_f64());
    for (i, q) in d.q.iter().enumerate() {
        println!("q{i} = {q:.10}");
    }
    println!("mass = {:.15}", d.mass_accounted);
    if n == 1_000_000 {
        for (got, want) in d.q.iter().zip(LONGEST_Q) {
            assert!((got - want).abs() <= 5e-7, "{got} vs {want}");
        }
    }
}
