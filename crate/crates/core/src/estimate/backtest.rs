use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{harris, CaseSeries, EstimateError, EstimatorKind, MeanEstimate};

/// Which mean estimate drives the one-step predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktestProtocol {
    /// A single Harris estimate on the whole series.
    #[default]
    FullSample,
    /// Harris re-estimated on the data available before each predicted day.
    Rolling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRow {
    /// Days before the end of the series; `k = 1` is the last day.
    pub k: usize,
    pub day: usize,
    pub date: NaiveDate,
    pub predicted: u64,
    pub observed: u64,
    /// Mean used for this row's prediction.
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<u64>,
}

fn predict(previous: u64, m: f64) -> u64 {
    // f64::round rounds half away from zero
    (previous as f64 * m).round() as u64
}

/// Predicts each of the last `days` observations from the one before it,
/// `round(z2[d-1] * m)`. Rows are ordered `k = days..1`.
///
/// `m_override` replaces the estimated mean for every row.
pub fn backtest(
    series: &CaseSeries,
    days: usize,
    m_override: Option<f64>,
    protocol: BacktestProtocol,
) -> Result<Vec<BacktestRow>, EstimateError> {
    let n = series.len();
    if days < 1 || days >= n {
        return Err(EstimateError::InvalidArgument(format!(
            "backtest needs 1 <= K < series length {n}, got K = {days}"
        )));
    }
    if let Some(m) = m_override {
        if !(m.is_finite() && m >= 0.0) {
            return Err(EstimateError::InvalidArgument(format!(
                "mean override must be nonnegative, got {m}"
            )));
        }
    }
    let full = match (m_override, protocol) {
        (Some(m), _) => Some(MeanEstimate::fixed(EstimatorKind::Harris, m, n - 1)),
        (None, BacktestProtocol::FullSample) => Some(harris(series, n - 1)?),
        (None, BacktestProtocol::Rolling) => None,
    };
    let mut rows = Vec::with_capacity(days);
    for k in (1..=days).rev() {
        let day = n - k + 1;
        let m = match &full {
            Some(e) => e.value,
            None => {
                if day < 3 {
                    return Err(EstimateError::InsufficientData(format!(
                        "rolling backtest of day {day} has no earlier estimate"
                    )));
                }
                harris(series, day - 2)?.value
            }
        };
        let previous = series.count(day - 1).expect("day >= 2");
        rows.push(BacktestRow {
            k,
            day,
            date: series.date(day),
            predicted: predict(previous, m),
            observed: series.count(day).expect("day <= n"),
            mean: m,
            lower: None,
            upper: None,
        });
    }
    Ok(rows)
}
