use serde::{Deserialize, Serialize};

use super::spec::{chi2_class_statistic, TestSpec};
use crate::bitgen::BitBlock;
use crate::error::{Error, Result};
use crate::numerics::chi2_sf_unchecked;

/// Cycles needed before the test yields p-values.
pub const EXCURSION_CYCLES: usize = 500;
/// The eight states, in output order.
pub const EXCURSION_STATES: [i32; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];

/// π_j(x) for visit counts j = 0..4 and ≥5.
pub fn excursion_class_probs(x: i32) -> Vec<f64> {
    let a = 1.0 / (2.0 * x.unsigned_abs() as f64);
    let c = 1.0 - a;
    let mut p = vec![c];
    for j in 1..=4 {
        p.push(a * a * c.powi(j - 1));
    }
    p.push(a * c.powi(4));
    p
}

pub fn excursion_spec(x: i32) -> Result<TestSpec> {
    if x == 0 || x.abs() > 4 {
        return Err(Error::Domain(format!("excursion state {x} not in ±1..±4")));
    }
    TestSpec::new(
        format!("random-excursions(x={x})"),
        EXCURSION_CYCLES as u64,
        excursion_class_probs(x),
        EXCURSION_CYCLES as u64,
    )
}

/// The result of scanning one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionOutcome {
    /// Completed cycles seen (at most 500).
    pub cycles: usize,
    /// Bits read before stopping.
    pub consumed: usize,
    /// Per-state class counts, rows in [`EXCURSION_STATES`] order.
    pub counts: Option<Vec<[u64; 6]>>,
    /// p-values in [`EXCURSION_STATES`] order when 500 cycles completed.
    pub p_values: Option<Vec<f64>>,
}

/// Walks S_k = Σ(2b_i − 1), stopping at the bit that completes the 500th
/// zero-to-zero cycle. A trailing partial cycle is never counted.
pub fn excursion_scan(block: &BitBlock) -> ExcursionOutcome {
    let mut counts = vec![[0u64; 6]; 8];
    let mut visits = [0u32; 9];
    let mut s: i64 = 0;
    let mut cycles = 0usize;
    let mut consumed = block.len();
    for i in 0..block.len() {
        s += if block.bit(i) { 1 } else { -1 };
        if s == 0 {
            for (row, &x) in counts.iter_mut().zip(&EXCURSION_STATES) {
                let v = visits[(x + 4) as usize] as usize;
                row[v.min(5)] += 1;
            }
            visits = [0; 9];
            cycles += 1;
            if cycles == EXCURSION_CYCLES {
                consumed = i + 1;
                break;
            }
        } else if s.abs() <= 4 {
            visits[(s + 4) as usize] += 1;
        }
    }
    if cycles < EXCURSION_CYCLES {
        return ExcursionOutcome {
            cycles,
            consumed,
            counts: None,
            p_values: None,
        };
    }
    let p_values = counts
        .iter()
        .zip(&EXCURSION_STATES)
        .map(|(row, &x)| {
            let spec = excursion_spec(x).expect("valid state");
            chi2_sf_unchecked(5, chi2_class_statistic(row, &spec))
        })
        .collect();
    ExcursionOutcome {
        cycles,
        consumed,
        counts: Some(counts),
        p_values: Some(p_values),
    }
}

/// Eight p-values, or `None` if the block holds fewer than 500 cycles.
pub fn random_excursions_test(block: &BitBlock) -> Option<Vec<f64>> {
    excursion_scan(block).p_values
}
