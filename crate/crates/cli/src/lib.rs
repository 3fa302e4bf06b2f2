//! Command-line workflows over the `covbranch` library.

pub mod args;
mod commands;
mod output;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use covbranch::estimate::EstimateError;
use covbranch::ingest::IngestError;
use covbranch::model::ModelError;
use covbranch::simulate::SimError;

pub use args::{Cli, Command};

/// Exit status for failures in the data or the estimation.
pub const EXIT_DATA: i32 = 1;
/// Exit status for invalid arguments or configuration.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Truncation { .. } => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::InvalidArgument(_) | EstimateError::OutOfRange { .. } => CliError::Usage(e.to_string()),
            EstimateError::Model(m) => m.into(),
            EstimateError::Sim(s) => s.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Runs a parsed command and returns the names of the files written.
pub fn run(command: &Command) -> Result<Vec<String>, CliError> {
    if let Command::Replay(replay) = command {
        let path = &replay.metadata;
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut recorded = parse_metadata(&text)?;
        if let (Some(out), Some(output)) = (&replay.out, recorded.output_mut()) {
            output.out = out.clone();
        }
        return run(&recorded);
    }
    let threads = match command {
        Command::Simulate(a) => a.output.threads,
        Command::Estimate(a) => a.output.threads,
        Command::Forecast(a) => a.output.threads,
        Command::Backtest(a) => a.output.threads,
        Command::Report(a) => a.output.threads,
        Command::Replay(_) => None,
    };
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(command)),
        None => dispatch(command),
    }
}

fn dispatch(command: &Command) -> Result<Vec<String>, CliError> {
    match command {
        Command::Simulate(a) => commands::simulate(command, a),
        Command::Estimate(a) => commands::estimate(command, a),
        Command::Forecast(a) => commands::forecast(command, a),
        Command::Backtest(a) => commands::backtest(command, a),
        Command::Report(a) => commands::report(command, a),
        Command::Replay(_) => unreachable!("handled in run"),
    }
}

/// Recovers the command recorded in a run.json.
pub fn parse_metadata(text: &str) -> Result<Command, CliError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid run metadata: {e}")))?;
    if let Some(map) = value.as_object_mut() {
        for key in ["tool", "version", "outputs", "details"] {
            map.remove(key);
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid run metadata: {e}")))
}
