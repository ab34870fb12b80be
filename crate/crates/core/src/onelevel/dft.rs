use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::bitgen::BitBlock;
use crate::error::{Error, Result};
use crate::numerics::erfc;

/// ln(1/0.05): 95% of the |F_i| should fall below √(this·n).
pub const DFT_THRESHOLD_FACTOR: f64 = 2.995732274;

/// Variance model for the count of small Fourier magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DftVariance {
    /// σ² = 0.05·0.95·n/2
    Sigma0,
    /// σ² = 0.05·0.95·n/4
    Sigma1,
    /// σ² = 0.05·0.95·n/3.8
    Sigma2,
}

impl DftVariance {
    pub const ALL: [DftVariance; 3] = [DftVariance::Sigma0, DftVariance::Sigma1, DftVariance::Sigma2];

    pub fn divisor(self) -> f64 {
        match self {
            DftVariance::Sigma0 => 2.0,
            DftVariance::Sigma1 => 4.0,
            DftVariance::Sigma2 => 3.8,
        }
    }

    pub fn sigma(self, n: u64) -> f64 {
        (0.05 * 0.95 * n as f64 / self.divisor()).sqrt()
    }
}

impl fmt::Display for DftVariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DftVariance::Sigma0 => "SIGMA0",
            DftVariance::Sigma1 => "SIGMA1",
            DftVariance::Sigma2 => "SIGMA2",
        })
    }
}

impl FromStr for DftVariance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SIGMA0" | "0" => Ok(DftVariance::Sigma0),
            "SIGMA1" | "1" => Ok(DftVariance::Sigma1),
            "SIGMA2" | "2" => Ok(DftVariance::Sigma2),
            _ => Err(Error::Unsupported(format!("unknown DFT variance {s:?}"))),
        }
    }
}

/// μ = 0.95·n/2, the expected count of magnitudes below the threshold.
pub fn dft_mean(n: u64) -> f64 {
    0.95 * n as f64 / 2.0
}

/// erfc(|O − μ| / (σ√2)).
pub fn dft_p_value(count: u64, n: u64, variance: DftVariance) -> f64 {
    let d = (count as f64 - dft_mean(n)).abs() / variance.sigma(n);
    erfc(d / std::f64::consts::SQRT_2)
}

struct Workspace {
    plan: Arc<dyn RealToComplex<f64>>,
    input: Vec<f64>,
    output: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
    static WORKSPACES: RefCell<HashMap<usize, Workspace>> = RefCell::new(HashMap::new());
}

/// Runs `f` on F_0..F_{n/2−1} of the ±1 sequence.
fn with_spectrum<T>(block: &BitBlock, f: impl FnOnce(&[Complex<f64>]) -> T) -> T {
    let n = block.len();
    WORKSPACES.with(|cache| {
        let mut cache = cache.borrow_mut();
        let ws = cache.entry(n).or_insert_with(|| {
            let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
            Workspace {
                input: plan.make_input_vec(),
                output: plan.make_output_vec(),
                scratch: plan.make_scratch_vec(),
                plan,
            }
        });
        for (x, b) in ws.input.iter_mut().zip(block.iter()) {
            *x = if b { 1.0 } else { -1.0 };
        }
        ws.plan
            .process_with_scratch(&mut ws.input, &mut ws.output, &mut ws.scratch)
            .expect("buffers sized by the plan");
        f(&ws.output[..n / 2])
    })
}

/// |F_i| for i = 0..n/2 of the ±1 sequence.
pub fn dft_magnitudes(block: &BitBlock) -> Vec<f64> {
    with_spectrum(block, |fs| fs.iter().map(|c| c.norm()).collect())
}

/// O_h = #{i < n/2 : |F_i| < √(2.995732274·n)}, F_0 included.
pub fn dft_count(block: &BitBlock) -> u64 {
    let h = (DFT_THRESHOLD_FACTOR * block.len() as f64).sqrt();
    with_spectrum(block, |fs| fs.iter().filter(|c| c.norm() < h).count() as u64)
}

pub fn dft_test(block: &BitBlock, variance: DftVariance) -> Result<f64> {
    if block.len() % 2 == 1 {
        return Err(Error::OddLength(block.len()));
    }
    if block.is_empty() {
        return Err(Error::BlockTooShort { needed: 2, got: 0 });
    }
    Ok(dft_p_value(dft_count(block), block.len() as u64, variance))
}
