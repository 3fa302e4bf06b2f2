use serde_json::json;

use covbranch::estimate::{
    ci_backtest, ci_mean, estimator_path, final_estimate, forecast_unregistered, BacktestProtocol,
    CaseSeries, EstimateError, EstimateReport, EstimatorKind, EstimatorPath, ForecastSet, MeanEstimate,
};
use covbranch::ingest::validate;

use super::{bootstrap, load_series};
use crate::args::{BacktestArgs, Command, EstimateArgs, ForecastArgs};
use crate::output::Output;
use crate::svg::{line_chart, Line};
use crate::CliError;

fn kinds(only: Option<EstimatorKind>) -> Vec<EstimatorKind> {
    only.map(|k| vec![k]).unwrap_or_else(|| EstimatorKind::ALL.to_vec())
}

fn write_path(path: &EstimatorPath, series: &CaseSeries, buf: &mut Vec<u8>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["day", "date", "n", "value", "numerator", "denominator"])?;
    for e in &path.estimates {
        let (num, den) = e.ratio.unwrap_or_default();
        let day = e.observed_through();
        w.write_record([
            day.to_string(),
            series.date(day).to_string(),
            e.day.to_string(),
            e.value.to_string(),
            num.to_string(),
            den.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn series_label(series: &CaseSeries) -> String {
    series.label().unwrap_or("series").to_owned()
}

pub fn estimate(command: &Command, args: &EstimateArgs) -> Result<Vec<String>, CliError> {
    let series = load_series(&args.input.input, &args.input.parse)?;
    let ci = bootstrap(&args.ci, args.window)?;
    let mut report = EstimateReport::new(&series);
    let mut undefined = Vec::new();
    let mut first_error = None;
    for kind in kinds(args.estimator) {
        match estimator_path(&series, kind, args.window) {
            Ok(path) => report.estimator_paths.push(path),
            Err(e @ EstimateError::InsufficientData(_)) => {
                eprintln!("warning: skipping {kind}: {e}");
                undefined.push(kind);
                first_error.get_or_insert(e);
                continue;
            }
            Err(e) => return Err(e.into()),
        }
        let point = match &ci {
            Some(config) => ci_mean(&series, kind, config),
            None => final_estimate(&series, kind, args.window),
        };
        match point {
            Ok(p) => report.point_estimates.push(p),
            Err(e @ (EstimateError::Undefined { .. } | EstimateError::InsufficientData(_))) => {
                eprintln!("warning: {e}");
                undefined.push(kind);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if report.estimator_paths.is_empty() {
        return Err(first_error.expect("no estimator ran").into());
    }

    let mut out = Output::create(&args.output)?;
    for path in &report.estimator_paths {
        out.csv(&format!("path_{}.csv", path.kind), |buf| write_path(path, &series, buf))?;
    }
    out.csv("m_dynamics.csv", |buf| report.write_m_dynamics(&series, buf))?;
    out.json("estimates.json", &report)?;
    out.json("validation.json", &validate(&series))?;
    out.svg("m_dynamics.svg", || {
        let lines: Vec<Line> = report
            .estimator_paths
            .iter()
            .map(|p| {
                Line::new(
                    p.kind.to_string(),
                    p.estimates.iter().map(|e| (e.observed_through() as f64, e.value)).collect(),
                )
            })
            .collect();
        line_chart(&format!("Offspring mean estimates, {}", series_label(&series)), "day", "m", &lines)
    })?;
    out.finish(command, json!({ "undefined_final_estimates": undefined }))
}

pub fn forecast(command: &Command, args: &ForecastArgs) -> Result<Vec<String>, CliError> {
    let series = load_series(&args.input.input, &args.input.parse)?;
    let n = series.len();
    let s = args.s.unwrap_or(n);
    if s < 1 || s > n {
        return Err(CliError::Usage(format!("--s {s} is outside the series days 1..={n}")));
    }
    let steps = n - s + args.horizon;
    let means: Vec<MeanEstimate> = match args.m_override {
        Some(m) => vec![MeanEstimate::fixed(
            args.estimator.unwrap_or(EstimatorKind::Harris),
            m,
            n.saturating_sub(1),
        )],
        None => {
            let mut means = Vec::new();
            for kind in kinds(args.estimator) {
                match final_estimate(&series, kind, args.window) {
                    Ok(m) => means.push(m),
                    Err(e @ (EstimateError::Undefined { .. } | EstimateError::InsufficientData(_))) => {
                        eprintln!("warning: {e}")
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            means
        }
    };
    if means.is_empty() {
        return Err(CliError::Data("no estimator is defined on this series".into()));
    }
    let forecasts = means
        .iter()
        .map(|m| forecast_unregistered(&series, s, steps, m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = EstimateReport::new(&series);
    report.point_estimates = means;
    report.set_forecast(ForecastSet { base_day: s, horizon: args.horizon, forecasts });

    let mut out = Output::create(&args.output)?;
    out.csv("mean_unregistered.csv", |buf| report.write_mean_unregistered(buf))?;
    out.csv("alpha.csv", |buf| report.write_alpha(buf))?;
    out.json("forecast.json", &report)?;
    let set = report.forecast.as_ref().expect("just set");
    out.svg("mean_unregistered.svg", || {
        let mut lines: Vec<Line> = set
            .forecasts
            .iter()
            .map(|f| Line::new(f.mean.kind.to_string(), f.points.iter().map(|p| (p.day as f64, p.m1_hat)).collect()))
            .collect();
        lines.push(Line::new(
            "registered",
            (1..=n).map(|d| (d as f64, series.count(d).unwrap_or(0) as f64)).collect(),
        ));
        line_chart("Unregistered contaminated, expected", "day", "individuals", &lines)
    })?;
    out.svg("alpha.svg", || {
        let lines: Vec<Line> = set
            .forecasts
            .iter()
            .map(|f| {
                Line::new(
                    f.mean.kind.to_string(),
                    f.points.iter().filter_map(|p| p.alpha_hat.map(|a| (p.day as f64, a))).collect(),
                )
            })
            .collect();
        line_chart("Registered share of the infected", "day", "alpha", &lines)
    })?;
    out.finish(command, json!({ "base_day": s, "steps": steps }))
}

pub fn backtest(command: &Command, args: &BacktestArgs) -> Result<Vec<String>, CliError> {
    let series = load_series(&args.input.input, &args.input.parse)?;
    let protocol = if args.rolling { BacktestProtocol::Rolling } else { BacktestProtocol::FullSample };
    let rows = match bootstrap(&args.ci, args.window)? {
        Some(config) => ci_backtest(&series, args.horizon, args.m_override, protocol, &config)?,
        None => covbranch::estimate::backtest(&series, args.horizon, args.m_override, protocol)?,
    };
    let mut report = EstimateReport::new(&series);
    report.backtest = rows;

    let mut out = Output::create(&args.output)?;
    out.csv("backtest.csv", |buf| report.write_backtest(buf))?;
    out.json("backtest.json", &report)?;
    out.svg("backtest.svg", || {
        let pick = |f: fn(&covbranch::estimate::BacktestRow) -> u64| {
            report.backtest.iter().map(|r| (r.day as f64, f(r) as f64)).collect()
        };
        line_chart(
            "Observed and predicted registered cases",
            "day",
            "cases",
            &[Line::new("observed", pick(|r| r.observed)), Line::new("predicted", pick(|r| r.predicted))],
        )
    })?;
    out.finish(command, json!({ "protocol": protocol }))
}
