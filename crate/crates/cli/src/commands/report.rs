use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::json;

use covbranch::estimate::{estimator_path, final_estimate, forecast_unregistered, CaseSeries, EstimatorKind};

use super::load_series;
use crate::args::{Command, ReportArgs};
use crate::output::Output;
use crate::svg::{line_chart, Line};
use crate::CliError;

#[derive(Debug, Serialize)]
struct InputSummary {
    label: String,
    path: PathBuf,
    start: NaiveDate,
    end: NaiveDate,
    length: usize,
    total: u64,
}

fn split_input(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_owned(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_owned());
            (label, path)
        }
    }
}

/// Harris estimates keyed by the last date they use.
fn harris_by_date(series: &CaseSeries, window: usize) -> Result<BTreeMap<NaiveDate, f64>, CliError> {
    let path = estimator_path(series, EstimatorKind::Harris, window)?;
    Ok(path
        .estimates
        .iter()
        .map(|e| (series.date(e.observed_through()), e.value))
        .collect())
}

/// Registered share on each observed day from `from` on, projected from the
/// first day at or after `from` with cases.
fn alpha_by_date(series: &CaseSeries, from: NaiveDate, window: usize) -> Result<BTreeMap<NaiveDate, f64>, CliError> {
    let m = final_estimate(series, EstimatorKind::Harris, window)?;
    let first = series.day_of(from).unwrap_or(1);
    let Some(s) = (first..=series.len()).find(|&d| series.count(d).unwrap_or(0) > 0) else {
        return Ok(BTreeMap::new());
    };
    let f = forecast_unregistered(series, s, series.len() - s, &m)?;
    Ok(f.points
        .iter()
        .filter_map(|p| p.alpha_hat.map(|a| (p.date, a)))
        .collect())
}

fn write_table(
    labels: &[String],
    columns: &[BTreeMap<NaiveDate, f64>],
    dates: &[NaiveDate],
    buf: &mut Vec<u8>,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(buf);
    let mut header = vec!["date".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for date in dates {
        let mut record = vec![date.to_string()];
        record.extend(columns.iter().map(|c| c.get(date).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn chart(title: &str, y: &str, labels: &[String], columns: &[BTreeMap<NaiveDate, f64>], dates: &[NaiveDate]) -> String {
    let lines: Vec<Line> = labels
        .iter()
        .zip(columns)
        .map(|(label, col)| {
            Line::new(
                label.clone(),
                dates
                    .iter()
                    .enumerate()
                    .filter_map(|(i, d)| col.get(d).map(|&v| (i as f64, v)))
                    .collect(),
            )
        })
        .collect();
    line_chart(title, "day of common range", y, &lines)
}

pub fn report(command: &Command, args: &ReportArgs) -> Result<Vec<String>, CliError> {
    if args.horizon == 0 {
        return Err(CliError::Usage("--horizon must be positive".into()));
    }
    let mut labels = Vec::new();
    let mut series = Vec::new();
    let mut inputs = Vec::new();
    for spec in &args.input {
        let (label, path) = split_input(spec);
        if labels.contains(&label) {
            return Err(CliError::Usage(format!("duplicate input label `{label}`")));
        }
        let s = load_series(&path, &args.parse)?.with_label(label.clone());
        let end = s.end().expect("parsed series are nonempty");
        inputs.push(InputSummary { label: label.clone(), path, start: s.start(), end, length: s.len(), total: s.total() });
        labels.push(label);
        series.push(s);
    }

    let start = inputs.iter().map(|i| i.start).max().expect("at least one input");
    let end = inputs.iter().map(|i| i.end).min().expect("at least one input");
    if start > end {
        return Err(CliError::Data("input series share no dates".into()));
    }
    let mut warnings = Vec::new();
    if inputs.iter().any(|i| i.start != start || i.end != end) {
        let msg = format!("inputs cover different dates; comparison restricted to {start}..{end}");
        eprintln!("warning: {msg}");
        warnings.push(msg);
    }
    let dates: Vec<NaiveDate> = start.iter_days().take_while(|d| *d <= end).collect();
    let alpha_from = dates[dates.len().saturating_sub(args.horizon)];
    let alpha_dates: Vec<NaiveDate> = dates.iter().copied().filter(|d| *d >= alpha_from).collect();

    let harris = series
        .iter()
        .map(|s| harris_by_date(s, args.window))
        .collect::<Result<Vec<_>, _>>()?;
    let alpha = series
        .iter()
        .map(|s| alpha_by_date(s, alpha_from, args.window))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Output::create(&args.output)?;
    out.csv("comparison_harris.csv", |buf| write_table(&labels, &harris, &dates, buf))?;
    out.csv("comparison_alpha.csv", |buf| write_table(&labels, &alpha, &alpha_dates, buf))?;
    out.svg("comparison_harris.svg", || chart("Harris estimates", "m", &labels, &harris, &dates))?;
    out.svg("comparison_alpha.svg", || chart("Registered share", "alpha", &labels, &alpha, &alpha_dates))?;
    let index = json!({
        "inputs": inputs,
        "common": { "start": start, "end": end },
        "warnings": warnings,
        "outputs": out.written(),
    });
    out.json("index.json", &index)?;
    out.finish(command, json!({ "warnings": warnings }))
}
