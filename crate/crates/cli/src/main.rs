mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipsample::eval::{EvalError, TailReference};
use ipsample::oracle::OracleError;
use ipsample::{DatasetError, HipsError, Method};
use thiserror::Error;

/// Default seed when neither --seed nor --entropy-seed is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "ipsample", version, about = "Sample interval patterns from numerical CSV data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset characteristics and normalisation constants.
    Stats(StatsArgs),
    /// Draw k patterns and write them as JSON lines.
    Sample(SampleArgs),
    /// Write every interval pattern of a small dataset as CSV.
    Enumerate(EnumerateArgs),
    /// Evaluation metrics over sampled patterns.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file with a header row and numeric cells.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct SeedArgs {
    #[arg(long, default_value_t = DEFAULT_SEED, conflicts_with = "entropy_seed")]
    seed: u64,
    /// Seed from system entropy; the seed used is written to the manifest.
    #[arg(long)]
    entropy_seed: bool,
}

impl SeedArgs {
    fn resolve(&self) -> (u64, &'static str) {
        if self.entropy_seed {
            (rand::random(), "entropy")
        } else {
            (self.seed, "fixed")
        }
    }
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    seed: SeedArgs,
    /// Pattern file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Refuse to enumerate more patterns than this.
    #[arg(long, default_value_t = ipsample::oracle::DEFAULT_CAP)]
    cap: u64,
    /// CSV file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Patterns per repetition.
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[command(flatten)]
    seed: SeedArgs,
    /// Repetitions; repetition r uses seed + r.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// Directory for metrics.csv, summary.json and manifest.json; summary to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Threads over repetitions.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TailReferenceArg {
    /// |G| for frequency, full-box volume × |G| for vol×freq.
    Attainable,
    /// Largest value among the sampled patterns.
    MaxObserved,
}

impl From<TailReferenceArg> for TailReference {
    fn from(r: TailReferenceArg) -> Self {
        match r {
            TailReferenceArg::Attainable => TailReference::Attainable,
            TailReferenceArg::MaxObserved => TailReference::MaxObserved,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    Freq,
    VolFreq,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Sorted frequency curve.
    FreqCurve(EvalArgs),
    /// Sorted vol×freq curve.
    VolfreqCurve(EvalArgs),
    /// Fraction of patterns below a relative threshold.
    Tail {
        #[command(flatten)]
        common: EvalArgs,
        #[arg(long, value_enum, default_value = "freq")]
        measure: MeasureArg,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long, value_enum, default_value = "attainable")]
        reference: TailReferenceArg,
    },
    /// Distinct covers over the number of patterns.
    Diversity(EvalArgs),
    /// Pairwise Jaccard CDF of pattern covers.
    JaccardCdf {
        #[command(flatten)]
        common: EvalArgs,
        /// Number of equal steps over [0, 1].
        #[arg(long, default_value_t = 20)]
        steps: u32,
    },
    /// Frequency drop on swap-randomized copies of the data.
    Plausibility {
        #[command(flatten)]
        common: EvalArgs,
        /// Randomized datasets per repetition.
        #[arg(long = "R", default_value_t = 10)]
        r: usize,
        /// Swaps per attribute; |G| when absent.
        #[arg(long)]
        swaps: Option<usize>,
        /// Only keep patterns with relative frequency in lo:hi.
        #[arg(long, value_parser = parse_band)]
        band: Option<(f64, f64)>,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
    },
    /// Draws needed for k patterns with relative frequency in lo:hi.
    DrawsInBand {
        #[command(flatten)]
        common: EvalArgs,
        #[arg(long, value_parser = parse_band)]
        band: (f64, f64),
        /// Seconds per repetition.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
    },
    /// Preprocessing and per-draw wall time on one thread.
    Timing(EvalArgs),
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    if !(0.0..=hi).contains(&lo) {
        return Err(format!("need 0 <= lo <= hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("time limit exceeded: {0}")]
    TimeLimit(String),
    #[error(transparent)]
    Degenerate(#[from] HipsError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::TimeLimit(_) => 4,
            CliError::Degenerate(_) => 5,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Hips(h) => CliError::Degenerate(h),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Hips(h) => CliError::Degenerate(h),
            EvalError::TooFewObjects => CliError::Data(e.to_string()),
            EvalError::TimeLimitExceeded { .. } => CliError::TimeLimit(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let command_line: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(a) => commands::stats(&a, &command_line),
        Command::Sample(a) => commands::sample(&a, &command_line),
        Command::Enumerate(a) => commands::enumerate(&a, &command_line),
        Command::Eval(e) => commands::eval(&e, &command_line),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
