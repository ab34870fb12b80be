use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use twolevel_core::bitgen::{FileFormat, SourceKind};
use twolevel_core::onelevel::{DftVariance, OneLevelTest};

/// Exact and Monte-Carlo p-value distributions, second-level sample-size
/// limits and two-level tests for SP800-22 one-level tests.
#[derive(Debug, Parser, Serialize)]
#[command(name = "twolevel", version)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, env = "TWOLEVEL_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Exact category distribution q by enumeration or binomial scan.
    ExactQ(ExactArgs),
    /// Monte-Carlo estimate q′ with a convergence trace.
    McQ(McArgs),
    /// Chi-squared discrepancy and risky/safe second-level sample sizes.
    Limits(LimitsArgs),
    /// Run a two-level test on a generator or a bit file.
    TwoLevel(TwoLevelArgs),
    /// Recompute a published table or figure and compare.
    Reproduce(ReproduceArgs),
    /// Dump generator output to a file.
    Gen(GenArgs),
}

/// Integers, also written as `1e6`, `21_000` or `21,000`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let clean: String = s.chars().filter(|&c| c != '_' && c != ',').collect();
    if let Ok(v) = clean.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = clean.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if !(f >= 0.0) || f.fract() != 0.0 || f > 9.0e18 {
        return Err(format!("not a non-negative integer: {s:?}"));
    }
    Ok(f as u64)
}

fn parse_test(s: &str) -> Result<OneLevelTest, String> {
    s.parse().map_err(|e: twolevel_core::Error| e.to_string())
}

fn parse_variance(s: &str) -> Result<DftVariance, String> {
    s.parse().map_err(|e: twolevel_core::Error| e.to_string())
}

fn parse_source(s: &str) -> Result<SourceKind, String> {
    s.parse().map_err(|e: twolevel_core::Error| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Auto,
    Raw,
    Ascii,
}

impl From<FormatArg> for FileFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => FileFormat::Auto,
            FormatArg::Raw => FileFormat::Raw,
            FormatArg::Ascii => FileFormat::Ascii,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TestArgs {
    /// One-level test, e.g. longest, overlap, linear:500, excursions, dft:sigma2.
    #[arg(long, value_parser = parse_test)]
    pub test: Option<OneLevelTest>,
    /// First-level sample size in bits.
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub n: u64,
    /// Block size, overriding the one in --test.
    #[arg(long, value_parser = parse_count)]
    pub m: Option<u64>,
    /// Random Excursions state.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<i32>,
    /// DFT variance variant (sigma0, sigma1, sigma2), overriding --test.
    #[arg(long, value_parser = parse_variance)]
    pub sigma: Option<DftVariance>,
    /// Number of intervals minus one.
    #[arg(long, default_value_t = 9)]
    pub nu: u32,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    pub test: TestArgs,
    /// Parallel slices per batch of work units (default: thread count).
    #[arg(long)]
    pub partitions: Option<usize>,
    /// Largest composition count run without --long-run or a checkpoint.
    #[arg(long, value_parser = parse_count, default_value = "1e10")]
    pub budget: u64,
    /// Checkpoint file; an existing one is resumed.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Lift the workload budget.
    #[arg(long)]
    pub long_run: bool,
    /// Output file name inside the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    pub test: TestArgs,
    /// Number of Monte-Carlo samples.
    #[arg(long = "M", value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = 10)]
    pub streams: usize,
    /// Trace cadence in samples (default M/100).
    #[arg(long, value_parser = parse_count)]
    pub checkpoint_every: Option<u64>,
    #[arg(long = "gen", value_parser = parse_source, default_value = "mt")]
    pub source: SourceKind,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulate whole sequences even for class-count tests.
    #[arg(long)]
    pub sequence: bool,
    /// Output file stem inside the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LimitsArgs {
    /// CategoryDistribution JSON, or an exact-q / mc-q output file.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[command(flatten)]
    pub test: TestArgs,
    /// Use this δ instead of the one computed from q.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0.0001)]
    pub alpha_risky: f64,
    #[arg(long, default_value_t = 0.25)]
    pub alpha_safe: f64,
    #[arg(long, value_parser = parse_count, default_value = "1e10")]
    pub budget: u64,
    #[arg(long)]
    pub long_run: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TwoLevelArgs {
    #[command(flatten)]
    pub test: TestArgs,
    /// Generator: mt, sha1, well, splitstream or file.
    #[arg(long = "gen", value_parser = parse_source, default_value = "mt")]
    pub source: SourceKind,
    /// Bit file for --gen file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    /// First seed; further runs use seed+1, seed+2, ...
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of independent runs.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Second-level sample size.
    #[arg(long = "N", value_parser = parse_count)]
    pub big_n: u64,
    /// uniform, exact, exact:<file> or mc:<file>.
    #[arg(long, default_value = "uniform")]
    pub null: String,
    #[arg(long, default_value_t = 0.0001)]
    pub significance: f64,
    #[arg(long, value_parser = parse_count, default_value = "1e10")]
    pub budget: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReproduceArgs {
    /// T1, T3, T8-limits, F1..F6, T11, or qualitative:T2, T4..T10, T12.
    pub table: String,
    /// Restrict T3 (and T4/T5) to the ±x column.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<i32>,
    /// Monte-Carlo samples for desk-scale estimates.
    #[arg(long = "M", value_parser = parse_count)]
    pub samples: Option<u64>,
    #[arg(long, value_enum, default_value = "desk")]
    pub scale: Scale,
    /// Allow runs beyond the budgets.
    #[arg(long)]
    pub long_run: bool,
    /// Largest enumeration run at desk scale.
    #[arg(long, value_parser = parse_count, default_value = "1e10")]
    pub budget: u64,
    /// Largest estimated CPU time, in seconds, of one two-level row at desk scale.
    #[arg(long, default_value_t = 120.0)]
    pub time_budget: f64,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long = "gen", value_parser = parse_source, default_value = "mt")]
    pub source: SourceKind,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of bits to write.
    #[arg(long, value_parser = parse_count)]
    pub bits: u64,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: FormatArg,
    /// Output file (relative paths go to the output directory).
    #[arg(long)]
    pub out: PathBuf,
}

impl TestArgs {
    /// The test with --m and --sigma applied.
    pub fn resolved(&self) -> Option<OneLevelTest> {
        let mut t = self.test?;
        match &mut t {
            OneLevelTest::BlockFrequency { m } | OneLevelTest::LongestRun { m } | OneLevelTest::LinearComplexity { m } => {
                if let Some(v) = self.m {
                    *m = v as usize;
                }
            }
            OneLevelTest::Dft { variance } => {
                if let Some(v) = self.sigma {
                    *variance = v;
                }
            }
            _ => {}
        }
        Some(t)
    }
}
