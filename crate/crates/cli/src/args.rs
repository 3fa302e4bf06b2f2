use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use covbranch::estimate::EstimatorKind;
use covbranch::ingest::ValueKind;
use covbranch::model::CalibrationFamily;

#[derive(Debug, Parser)]
#[command(name = "covbranch", version, about = "Branching-process analysis of registered case counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Simulate trajectories and a Monte Carlo ensemble of the process.
    Simulate(SimulateArgs),
    /// Estimate the offspring mean along the series, with bootstrap intervals.
    Estimate(EstimateArgs),
    /// Project the unregistered contaminated mean and the registered share.
    Forecast(ForecastArgs),
    /// Re-predict the last days of the series one step ahead.
    Backtest(BacktestArgs),
    /// Compare several series on their common dates.
    Report(ReportArgs),
    /// Re-run a command from the run.json it wrote.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated output formats.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<Format>,
    /// Worker threads for parallel work; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl OutputArgs {
    pub fn wants(&self, format: Format) -> bool {
        self.format.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct InputArgs {
    /// CSV with columns date,value[,region].
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub parse: ParseArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ParseArgs {
    #[arg(long, default_value = "daily")]
    pub value_kind: ValueKind,
    /// Region to select when the input has a region column.
    #[arg(long)]
    pub region: Option<String>,
    /// Insert zero days for missing dates.
    #[arg(long)]
    pub fill_missing_zero: bool,
    /// Clamp negative counts to zero instead of failing.
    #[arg(long)]
    pub allow_corrections: bool,
    /// Keep zero days before the first case.
    #[arg(long)]
    pub keep_leading_zeros: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CiArgs {
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Bootstrap replicates; 0 disables intervals.
    #[arg(long, default_value_t = 2000)]
    pub ci_reps: usize,
    /// Registration probability of the bootstrap model.
    #[arg(long, default_value_t = covbranch::estimate::DEFAULT_BOOTSTRAP_Q)]
    pub ci_q: f64,
    /// Seed for the bootstrap; required when intervals are requested.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Law family to calibrate to --m and --q.
    #[arg(long, conflicts_with = "law", requires_all = ["m", "q"])]
    pub family: Option<CalibrationFamily>,
    /// Target offspring mean.
    #[arg(long)]
    pub m: Option<f64>,
    /// Registration probability.
    #[arg(long)]
    pub q: Option<f64>,
    /// Offspring law as JSON, inline or a path to a file.
    #[arg(long)]
    pub law: Option<String>,
    /// Initial number of contaminated individuals.
    #[arg(long, default_value_t = 1)]
    pub n0: u64,
    #[arg(long)]
    pub days: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    /// Population size treated as an explosion.
    #[arg(long, default_value_t = covbranch::model::DEFAULT_POPULATION_CAP)]
    pub cap: u64,
    /// Date of day 1 in the registered-counts CSV.
    #[arg(long, default_value = "2020-01-01")]
    pub start: NaiveDate,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Crump-Hove window.
    #[arg(long, default_value_t = covbranch::estimate::DEFAULT_WINDOW)]
    pub window: usize,
    /// Restrict to one estimator.
    #[arg(long)]
    pub estimator: Option<EstimatorKind>,
    #[command(flatten)]
    pub ci: CiArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Base day; defaults to the last day of the series.
    #[arg(long)]
    pub s: Option<usize>,
    /// Days to project beyond the end of the series.
    #[arg(long, default_value_t = 5)]
    pub horizon: usize,
    /// Restrict to one estimator.
    #[arg(long)]
    pub estimator: Option<EstimatorKind>,
    #[arg(long, default_value_t = covbranch::estimate::DEFAULT_WINDOW)]
    pub window: usize,
    /// Use this offspring mean instead of estimating it.
    #[arg(long)]
    pub m_override: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of trailing days to re-predict.
    #[arg(long, default_value_t = 5)]
    pub horizon: usize,
    #[arg(long)]
    pub m_override: Option<f64>,
    /// Re-estimate the mean from the data before each predicted day.
    #[arg(long)]
    pub rolling: bool,
    #[arg(long, default_value_t = covbranch::estimate::DEFAULT_WINDOW)]
    pub window: usize,
    #[command(flatten)]
    pub ci: CiArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Input CSVs, optionally as LABEL=PATH.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<String>,
    #[command(flatten)]
    pub parse: ParseArgs,
    /// Trailing days of registered share to compare.
    #[arg(long, default_value_t = 20)]
    pub horizon: usize,
    #[arg(long, default_value_t = covbranch::estimate::DEFAULT_WINDOW)]
    pub window: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// run.json written by an earlier invocation.
    pub metadata: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn output_mut(&mut self) -> Option<&mut OutputArgs> {
        match self {
            Command::Simulate(a) => Some(&mut a.output),
            Command::Estimate(a) => Some(&mut a.output),
            Command::Forecast(a) => Some(&mut a.output),
            Command::Backtest(a) => Some(&mut a.output),
            Command::Report(a) => Some(&mut a.output),
            Command::Replay(_) => None,
        }
    }
}
