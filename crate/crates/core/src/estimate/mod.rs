//! Estimation of the offspring mean from observed registered counts, and the
//! derived forecasts of the unobserved contaminated population.

mod backtest;
mod bootstrap;
mod estimators;
mod forecast;
mod report;
mod series;

use thiserror::Error;

use crate::model::ModelError;
use crate::simulate::SimError;

pub use backtest::{backtest, BacktestProtocol, BacktestRow};
pub use bootstrap::{ci_backtest, ci_mean, BootstrapConfig, DEFAULT_BOOTSTRAP_Q};
pub use estimators::{
    crump_hove, estimate_at, estimator_path, final_estimate, harris, lotka_nagaev, EstimatorKind,
    EstimatorPath, Interval, MeanEstimate, DEFAULT_WINDOW,
};
pub use forecast::{alpha, forecast_unregistered, Forecast, ForecastPoint};
pub use report::{AlphaPoint, EstimateReport, ForecastSet, SeriesMeta};
pub use series::{CaseSeries, Correction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("{kind} is undefined at day {day}: {reason}")]
    Undefined {
        kind: EstimatorKind,
        day: usize,
        reason: String,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{kind}: {what}")]
    OutOfRange { kind: EstimatorKind, what: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("forecast base day {day} has no registered cases")]
    DegenerateBase { day: usize },
    #[error("proportion is undefined: registered and unregistered are both zero")]
    UndefinedProportion,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("failed to write output: {0}")]
    Io(String),
}

impl From<csv::Error> for EstimateError {
    fn from(e: csv::Error) -> Self {
        EstimateError::Io(e.to_string())
    }
}

impl From<std::io::Error> for EstimateError {
    fn from(e: std::io::Error) -> Self {
        EstimateError::Io(e.to_string())
    }
}

#[cfg(test)]
pub(crate) fn bulgaria() -> CaseSeries {
    let daily = vec![
        4, 0, 2, 1, 16, 8, 10, 10, 11, 19, 11, 18, 17, 36, 22, 16, 19, 22, 22, 29, 38,
    ];
    CaseSeries::new(chrono::NaiveDate::from_ymd_opt(2020, 3, 8).unwrap(), daily)
}
