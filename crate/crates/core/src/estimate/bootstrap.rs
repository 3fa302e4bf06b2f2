//! Parametric bootstrap intervals.
//!
//! A geometric law is calibrated to the point estimate, synthetic registered
//! series of the observed length are simulated from it, and the statistic of
//! interest is recomputed on each. Synthetic paths whose contaminated
//! population dies out within the window are discarded, since the observed
//! series did not. Replicate `b` always uses stream `b` of the configured
//! seed, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    backtest, estimate_at, final_estimate, BacktestProtocol, BacktestRow, CaseSeries,
    EstimateError, EstimatorKind, Interval, MeanEstimate, DEFAULT_WINDOW,
};
use crate::model::{calibrate, max_registration, CalibrationFamily, InitialPopulation, ModelConfig};
use crate::simulate::{simulate_replicate, SimError};

pub const DEFAULT_BOOTSTRAP_Q: f64 = 0.3;
const MIN_DEFINED: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Registration probability of the synthetic law. Lowered to the largest
    /// feasible value when the point estimate does not admit it.
    pub q: f64,
    /// Crump-Hove window.
    pub window: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            level: 0.95,
            replicates: 2000,
            seed: 0,
            q: DEFAULT_BOOTSTRAP_Q,
            window: DEFAULT_WINDOW,
        }
    }
}

impl BootstrapConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<(), EstimateError> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(EstimateError::InvalidArgument(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(EstimateError::InvalidArgument(format!(
                "bootstrap q must lie in (0, 1], got {}",
                self.q
            )));
        }
        if self.replicates < MIN_DEFINED {
            return Err(EstimateError::InvalidArgument(format!(
                "at least {MIN_DEFINED} bootstrap replicates are needed, got {}",
                self.replicates
            )));
        }
        Ok(())
    }
}

/// Synthetic model matching `series` under offspring mean `m`.
fn synthetic_model(series: &CaseSeries, m: f64, config: &BootstrapConfig) -> Result<ModelConfig, EstimateError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(EstimateError::InsufficientData(format!(
            "cannot bootstrap around offspring mean {m}"
        )));
    }
    let q = config.q.min(max_registration(CalibrationFamily::Geometric, m));
    let law = calibrate(CalibrationFamily::Geometric, m, q)?;
    let first = series.count(1).unwrap_or(0) as f64;
    let start = ((first / q).round() as u64).max(1);
    Ok(ModelConfig::new(law, InitialPopulation::fixed(start)?, series.len()))
}

/// Runs every replicate and keeps the defined values of `statistic`, in
/// replicate order.
fn replicate_values<F>(model: &ModelConfig, config: &BootstrapConfig, statistic: F) -> Result<Vec<f64>, EstimateError>
where
    F: Fn(&CaseSeries) -> Option<f64> + Sync,
{
    let values: Vec<Option<f64>> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|b| match simulate_replicate(model, config.seed, b) {
            Ok(path) if path.z1.last() == Some(&0) => Ok(None),
            Ok(path) => Ok(statistic(&CaseSeries::from_counts(path.registered().to_vec()))),
            Err(SimError::Explosion { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let defined: Vec<f64> = values.into_iter().flatten().collect();
    if defined.len() < MIN_DEFINED {
        return Err(EstimateError::InsufficientData(format!(
            "only {} of {} bootstrap replicates gave a defined value",
            defined.len(),
            config.replicates
        )));
    }
    Ok(defined)
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn central_interval(mut values: Vec<f64>, level: f64) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile(&values, tail), quantile(&values, 1.0 - tail))
}

/// Final estimate of `kind` on the whole series with a bootstrap interval.
pub fn ci_mean(series: &CaseSeries, kind: EstimatorKind, config: &BootstrapConfig) -> Result<MeanEstimate, EstimateError> {
    config.check()?;
    let mut point = final_estimate(series, kind, config.window)?;
    let model = synthetic_model(series, point.value, config)?;
    let day = point.day;
    let values = replicate_values(&model, config, |s| {
        estimate_at(s, kind, day, config.window).ok().map(|e| e.value)
    })?;
    let (lower, upper) = central_interval(values, config.level);
    point.ci = Some(Interval {
        lower: lower.min(point.value),
        upper: upper.max(point.value),
        level: config.level,
    });
    Ok(point)
}

/// Backtest rows with integer prediction bounds.
///
/// For each predicted day `d`, replicate `b` contributes
/// `z2[d-1] * z2_b[d] / z2_b[d-1]`, the observed base scaled by the synthetic
/// one-step growth.
pub fn ci_backtest(
    series: &CaseSeries,
    days: usize,
    m_override: Option<f64>,
    protocol: BacktestProtocol,
    config: &BootstrapConfig,
) -> Result<Vec<BacktestRow>, EstimateError> {
    config.check()?;
    let mut rows = backtest(series, days, m_override, protocol)?;
    let m = match m_override {
        Some(m) => m,
        None => final_estimate(series, EstimatorKind::Harris, config.window)?.value,
    };
    let model = synthetic_model(series, m, config)?;
    for row in &mut rows {
        let d = row.day;
        let base = series.count(d - 1).expect("backtest rows start at day 2") as f64;
        let values = replicate_values(&model, config, |s| {
            let prev = s.count(d - 1)?;
            (prev > 0).then(|| base * s.count(d).expect("same length") as f64 / prev as f64)
        })?;
        let (lower, upper) = central_interval(values, config.level);
        row.lower = Some((lower.floor().max(0.0) as u64).min(row.predicted));
        row.upper = Some((upper.ceil() as u64).max(row.predicted));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::bulgaria;

    fn small(seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            replicates: 300,
            ..BootstrapConfig::default()
        }
        .with_seed(seed)
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.125), 1.5);
        assert_eq!(quantile(&v, 1.0), 5.0);
    }

    #[test]
    fn interval_contains_point_and_is_deterministic() {
        let s = bulgaria();
        for kind in EstimatorKind::ALL {
            let a = ci_mean(&s, kind, &small(7)).unwrap();
            let b = ci_mean(&s, kind, &small(7)).unwrap();
            assert_eq!(a, b);
            let ci = a.ci.unwrap();
            assert!(ci.contains(a.value), "{kind}: {ci:?} vs {}", a.value);
            assert!(ci.lower < ci.upper);
        }
        let other = ci_mean(&s, EstimatorKind::Harris, &small(8)).unwrap();
        assert_ne!(other, ci_mean(&s, EstimatorKind::Harris, &small(7)).unwrap());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let s = bulgaria();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ci_mean(&s, EstimatorKind::Harris, &small(3)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn large_stable_series_gives_narrow_interval() {
        let s = CaseSeries::from_counts(vec![5000; 30]);
        let config = BootstrapConfig { q: 0.5, ..small(1) };
        let ci = ci_mean(&s, EstimatorKind::Harris, &config).unwrap().ci.unwrap();
        assert!(ci.half_width() < 0.02, "{ci:?}");
    }

    #[test]
    fn backtest_bounds_bracket_predictions() {
        let rows = ci_backtest(&bulgaria(), 5, Some(1.1093), BacktestProtocol::FullSample, &small(11)).unwrap();
        for r in &rows {
            let (lo, hi) = (r.lower.unwrap(), r.upper.unwrap());
            assert!(lo <= r.predicted && r.predicted <= hi, "{r:?}");
            assert!(hi > lo);
        }
        let again = ci_backtest(&bulgaria(), 5, Some(1.1093), BacktestProtocol::FullSample, &small(11)).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn rejects_bad_configs() {
        let s = bulgaria();
        let bad_level = BootstrapConfig { level: 1.0, ..small(0) };
        assert!(ci_mean(&s, EstimatorKind::Harris, &bad_level).is_err());
        let few = BootstrapConfig { replicates: 3, ..small(0) };
        assert!(ci_mean(&s, EstimatorKind::Harris, &few).is_err());
        let zeros = CaseSeries::from_counts(vec![0, 0, 0]);
        assert!(ci_mean(&zeros, EstimatorKind::Harris, &small(0)).is_err());
    }
}
