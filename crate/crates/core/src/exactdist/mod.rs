//! Exact category distributions of approximated p-values.
//!
//! Multinomial tests are handled by enumerating every composition of the
//! n_b blocks over the k + 1 classes; Frequency and DFT reduce to a scan
//! over one binomial count.

mod checkpoint;
mod cursor;
mod distribution;
mod enumerate;
mod scan;

pub use checkpoint::{spec_hash, Checkpoint};
pub use cursor::CompositionCursor;
pub use distribution::{interval_index, round_sig15, uniform, CategoryDistribution, Provenance};
pub use enumerate::{
    enumerate_q, enumerate_q_with, estimate_workload, EnumerateOptions, EnumerationOutcome, DEFAULT_BUDGET,
    DEFAULT_CHECKPOINT_EVERY,
};
pub use scan::{binomial_scan_q, BinomialModel};
