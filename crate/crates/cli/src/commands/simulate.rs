use std::fs;

use serde_json::json;

use covbranch::estimate::CaseSeries;
use covbranch::ingest;
use covbranch::model::{calibrate, classify, InitialPopulation, ModelConfig, OffspringLaw};
use covbranch::simulate::{monte_carlo, simulate_trajectory};

use crate::args::{Command, SimulateArgs};
use crate::output::Output;
use crate::svg::{line_chart, Line};
use crate::CliError;

fn resolve_law(args: &SimulateArgs) -> Result<OffspringLaw, CliError> {
    match (&args.family, &args.law) {
        (Some(family), None) => {
            let (m, q) = args.m.zip(args.q).ok_or_else(|| CliError::Usage("--family needs --m and --q".into()))?;
            Ok(calibrate(*family, m, q)?)
        }
        (None, Some(spec)) => {
            let text = if spec.trim_start().starts_with('{') {
                spec.clone()
            } else {
                fs::read_to_string(spec).map_err(|e| CliError::io(spec.as_ref(), e))?
            };
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid law: {e}")))
        }
        _ => Err(CliError::Usage("give either --family with --m and --q, or --law".into())),
    }
}

pub fn simulate(command: &Command, args: &SimulateArgs) -> Result<Vec<String>, CliError> {
    let law = resolve_law(args)?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let config = ModelConfig::new(law.clone(), InitialPopulation::fixed(args.n0)?, args.days).with_cap(args.cap);
    let path = simulate_trajectory(&config, args.seed)?;
    let ensemble = monte_carlo(&config, args.reps, args.seed)?;
    let registered = CaseSeries::new(args.start, path.registered().to_vec());

    let mut out = Output::create(&args.output)?;
    out.csv("trajectory.csv", |buf| path.write_csv(buf))?;
    out.csv("registered.csv", |buf| ingest::write_csv(&registered, buf))?;
    out.csv("ensemble.csv", |buf| ensemble.write_csv(buf))?;
    out.json("ensemble.json", &ensemble)?;
    out.svg("ensemble.svg", || {
        let days = || ensemble.per_day.iter().skip(1);
        line_chart(
            "Ensemble means",
            "day",
            "individuals",
            &[
                Line::new("mean_z1", days().map(|d| (d.day as f64, d.mean_z1)).collect()),
                Line::new("mean_z2", days().map(|d| (d.day as f64, d.mean_z2)).collect()),
            ],
        )
    })?;
    if !ensemble.exploded.is_empty() {
        eprintln!(
            "warning: {} of {} replicates exceeded the population cap and were excluded",
            ensemble.exploded.len(),
            ensemble.requested
        );
    }
    let m = law.mean();
    out.finish(
        command,
        json!({ "law": law, "mean": m, "criticality": classify(m), "reps_counted": ensemble.reps }),
    )
}
