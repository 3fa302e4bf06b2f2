use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{CaseSeries, EstimateError, MeanEstimate};

/// Registered share `z2 / (z2 + m1)` of everyone infected on a day.
pub fn alpha(registered: f64, unregistered: f64) -> Result<f64, EstimateError> {
    if !(registered >= 0.0 && unregistered >= 0.0) {
        return Err(EstimateError::InvalidArgument(format!(
            "counts must be nonnegative, got ({registered}, {unregistered})"
        )));
    }
    let total = registered + unregistered;
    if total == 0.0 {
        return Err(EstimateError::UndefinedProportion);
    }
    Ok(registered / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    /// Days after the base day; 0 is the base day itself.
    pub k: usize,
    pub day: usize,
    pub date: NaiveDate,
    /// Expected number of unregistered contaminated individuals.
    pub m1_hat: f64,
    /// Registered count on `day`, when observed.
    pub observed: Option<u64>,
    /// Registered proportion, when `day` is observed.
    pub alpha_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub base_day: usize,
    pub mean: MeanEstimate,
    pub points: Vec<ForecastPoint>,
}

/// Projects the unregistered mean from base day `s`, using the registered
/// count there as a proxy for the contaminated population, for `k = 0..=horizon`.
pub fn forecast_unregistered(
    series: &CaseSeries,
    s: usize,
    horizon: usize,
    mean: &MeanEstimate,
) -> Result<Forecast, EstimateError> {
    if s < 1 || s > series.len() {
        return Err(EstimateError::InvalidArgument(format!(
            "base day {s} outside 1..={}",
            series.len()
        )));
    }
    let m = mean.value;
    if !(m.is_finite() && m > 0.0) {
        return Err(EstimateError::InvalidArgument(format!(
            "offspring mean must be positive, got {m}"
        )));
    }
    let base = series.count(s).expect("checked range");
    if base == 0 {
        return Err(EstimateError::DegenerateBase { day: s });
    }
    let mut points = Vec::with_capacity(horizon + 1);
    let mut m1_hat = base as f64;
    for k in 0..=horizon {
        if k > 0 {
            m1_hat *= m;
        }
        let day = s + k;
        let observed = series.count(day);
        let alpha_hat = match observed {
            Some(z) => Some(alpha(z as f64, m1_hat)?),
            None => None,
        };
        points.push(ForecastPoint {
            k,
            day,
            date: series.date(day),
            m1_hat,
            observed,
            alpha_hat,
        });
    }
    Ok(Forecast {
        base_day: s,
        mean: mean.clone(),
        points,
    })
}
