mod analyse;
mod report;
mod simulate;

use std::fs;
use std::path::Path;

use covbranch::estimate::{BootstrapConfig, CaseSeries};
use covbranch::ingest::{parse_csv, validate, ParseOptions};

use crate::args::{CiArgs, ParseArgs};
use crate::CliError;

pub use analyse::{backtest, estimate, forecast};
pub use report::report;
pub use simulate::simulate;

fn parse_options(args: &ParseArgs) -> ParseOptions {
    ParseOptions {
        value_kind: args.value_kind,
        region: args.region.clone(),
        fill_missing_zero: args.fill_missing_zero,
        allow_corrections: args.allow_corrections,
        keep_leading_zeros: args.keep_leading_zeros,
    }
}

/// Reads and parses one input, reporting validation warnings on stderr.
fn load_series(path: &Path, args: &ParseArgs) -> Result<CaseSeries, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let series = parse_csv(&text, &parse_options(args)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for warning in validate(&series).warnings {
        eprintln!("warning: {}: {warning}", path.display());
    }
    Ok(series)
}

/// Bootstrap settings, or `None` when intervals are disabled.
fn bootstrap(ci: &CiArgs, window: usize) -> Result<Option<BootstrapConfig>, CliError> {
    if ci.ci_reps == 0 {
        return Ok(None);
    }
    let seed = ci
        .seed
        .ok_or_else(|| CliError::Usage("--seed is required for bootstrap intervals (or pass --ci-reps 0)".into()))?;
    Ok(Some(BootstrapConfig {
        level: ci.ci_level,
        replicates: ci.ci_reps,
        seed,
        q: ci.ci_q,
        window,
    }))
}
