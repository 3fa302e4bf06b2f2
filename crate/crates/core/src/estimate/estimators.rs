//! Ratio estimators of the offspring mean from registered counts.
//!
//! All three are ratios of integer sums of the observed counts; the exact
//! numerator and denominator are kept alongside the floating point value.

use serde::{Deserialize, Serialize};

use super::{CaseSeries, EstimateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    LotkaNagaev,
    Harris,
    CrumpHove,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::LotkaNagaev,
        EstimatorKind::Harris,
        EstimatorKind::CrumpHove,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::LotkaNagaev => "lotka_nagaev",
            EstimatorKind::Harris => "harris",
            EstimatorKind::CrumpHove => "crump_hove",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "lotka-nagaev" => Ok(EstimatorKind::LotkaNagaev),
            "harris" => Ok(EstimatorKind::Harris),
            "crump-hove" => Ok(EstimatorKind::CrumpHove),
            other => Err(format!(
                "unknown estimator `{other}`, expected harris, lotka-nagaev or crump-hove"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Estimate of the offspring mean at day `day` (the estimator's subscript).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub kind: EstimatorKind,
    pub value: f64,
    pub day: usize,
    /// Crump-Hove window length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Exact `(numerator, denominator)` sums, absent for overridden values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<Interval>,
}

impl MeanEstimate {
    /// A fixed value not derived from data, e.g. a user override.
    pub fn fixed(kind: EstimatorKind, value: f64, day: usize) -> Self {
        Self {
            kind,
            value,
            day,
            window: None,
            ratio: None,
            ci: None,
        }
    }

    /// Last observation day the estimate consumes.
    pub fn observed_through(&self) -> usize {
        match self.kind {
            EstimatorKind::CrumpHove => self.day + self.window.unwrap_or(1),
            _ => self.day + 1,
        }
    }
}

fn ratio_estimate(
    kind: EstimatorKind,
    day: usize,
    window: Option<usize>,
    numerator: u64,
    denominator: u64,
) -> Result<MeanEstimate, EstimateError> {
    if denominator == 0 {
        return Err(EstimateError::Undefined {
            kind,
            day,
            reason: "denominator is zero".into(),
        });
    }
    Ok(MeanEstimate {
        kind,
        value: numerator as f64 / denominator as f64,
        day,
        window,
        ratio: Some((numerator, denominator)),
        ci: None,
    })
}

fn check_range(kind: EstimatorKind, ok: bool, what: String) -> Result<(), EstimateError> {
    if ok {
        Ok(())
    } else {
        Err(EstimateError::OutOfRange { kind, what })
    }
}

/// `Z2(n+1) / Z2(n)`.
pub fn lotka_nagaev(series: &CaseSeries, n: usize) -> Result<MeanEstimate, EstimateError> {
    let kind = EstimatorKind::LotkaNagaev;
    check_range(
        kind,
        n >= 1 && n < series.len(),
        format!("day {n} needs 1 <= n < {}", series.len()),
    )?;
    let den = series.count(n).expect("checked range");
    let num = series.count(n + 1).expect("checked range");
    ratio_estimate(kind, n, None, num, den)
}

/// `(Z2(2) + .. + Z2(n+1)) / (Z2(1) + .. + Z2(n))`.
pub fn harris(series: &CaseSeries, n: usize) -> Result<MeanEstimate, EstimateError> {
    let kind = EstimatorKind::Harris;
    check_range(
        kind,
        n >= 1 && n < series.len(),
        format!("day {n} needs 1 <= n < {}", series.len()),
    )?;
    let den = series.cumulative(n).expect("checked range");
    let num = series.cumulative(n + 1).expect("checked range") - series.count(1).expect("nonempty");
    ratio_estimate(kind, n, None, num, den)
}

/// `(Z2(n+1) + .. + Z2(n+N)) / (Z2(n) + .. + Z2(n+N-1))`.
pub fn crump_hove(series: &CaseSeries, n: usize, window: usize) -> Result<MeanEstimate, EstimateError> {
    let kind = EstimatorKind::CrumpHove;
    check_range(
        kind,
        n >= 1 && window >= 1 && n + window <= series.len(),
        format!("day {n} with window {window} needs n >= 1, N >= 1, n + N <= {}", series.len()),
    )?;
    let u = |k| series.cumulative(k).expect("checked range");
    let num = u(n + window) - u(n);
    let den = u(n + window - 1) - u(n - 1);
    ratio_estimate(kind, n, Some(window), num, den)
}

/// Default Crump-Hove window.
pub const DEFAULT_WINDOW: usize = 5;

/// Estimate of `kind` at day `n`.
pub fn estimate_at(
    series: &CaseSeries,
    kind: EstimatorKind,
    n: usize,
    window: usize,
) -> Result<MeanEstimate, EstimateError> {
    match kind {
        EstimatorKind::LotkaNagaev => lotka_nagaev(series, n),
        EstimatorKind::Harris => harris(series, n),
        EstimatorKind::CrumpHove => crump_hove(series, n, window),
    }
}

/// Most recent estimate of `kind` using the whole series.
pub fn final_estimate(
    series: &CaseSeries,
    kind: EstimatorKind,
    window: usize,
) -> Result<MeanEstimate, EstimateError> {
    let n = match kind {
        EstimatorKind::CrumpHove => series.len().checked_sub(window),
        _ => series.len().checked_sub(1),
    };
    match n {
        Some(n) if n >= 1 => estimate_at(series, kind, n, window),
        _ => Err(EstimateError::InsufficientData(format!(
            "{kind} needs more than {} observations",
            if kind == EstimatorKind::CrumpHove { window } else { 1 }
        ))),
    }
}

/// Estimates on every growing sample `Z2(1..s)`; days where the estimator is
/// undefined are listed in `skipped` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorPath {
    pub kind: EstimatorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    pub estimates: Vec<MeanEstimate>,
    pub skipped: Vec<usize>,
}

impl EstimatorPath {
    pub fn last(&self) -> Option<&MeanEstimate> {
        self.estimates.last()
    }
}

pub fn estimator_path(
    series: &CaseSeries,
    kind: EstimatorKind,
    window: usize,
) -> Result<EstimatorPath, EstimateError> {
    if series.len() < 2 {
        return Err(EstimateError::InsufficientData(format!(
            "estimator paths need at least 2 observations, got {}",
            series.len()
        )));
    }
    let last = match kind {
        EstimatorKind::CrumpHove => {
            if window == 0 || series.len() <= window {
                return Err(EstimateError::InsufficientData(format!(
                    "crump_hove window {window} needs more than {window} observations"
                )));
            }
            series.len() - window
        }
        _ => series.len() - 1,
    };
    let mut estimates = Vec::with_capacity(last);
    let mut skipped = Vec::new();
    for n in 1..=last {
        match estimate_at(series, kind, n, window) {
            Ok(e) => estimates.push(e),
            Err(EstimateError::Undefined { .. }) => skipped.push(n),
            Err(e) => return Err(e),
        }
    }
    Ok(EstimatorPath {
        kind,
        window: (kind == EstimatorKind::CrumpHove).then_some(window),
        estimates,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::bulgaria;
    use proptest::prelude::*;

    #[test]
    fn lotka_nagaev_examples() {
        let s = bulgaria();
        let e = lotka_nagaev(&s, 20).unwrap();
        assert_eq!(e.ratio, Some((38, 29)));
        assert!((e.value - 1.3103).abs() < 1e-4);
        assert!(matches!(
            lotka_nagaev(&s, 2),
            Err(EstimateError::Undefined { day: 2, .. })
        ));
        let flat = CaseSeries::from_counts(vec![7; 10]);
        assert_eq!(lotka_nagaev(&flat, 4).unwrap().value, 1.0);
        assert!(lotka_nagaev(&flat, 10).is_err());
        assert!(lotka_nagaev(&flat, 0).is_err());
    }

    #[test]
    fn harris_examples() {
        let s = bulgaria();
        let e = harris(&s, 20).unwrap();
        assert_eq!(e.ratio, Some((327, 293)));
        assert_eq!(e.value, 327.0 / 293.0);
        let flat = CaseSeries::from_counts(vec![3; 12]);
        for n in 1..12 {
            assert_eq!(harris(&flat, n).unwrap().value, 1.0);
        }
        let geometric = CaseSeries::from_counts((1..=20).map(|i| 3u64.pow(i)).collect());
        for n in 1..20 {
            assert_eq!(harris(&geometric, n).unwrap().value, 3.0);
        }
    }

    #[test]
    fn crump_hove_examples() {
        let s = bulgaria();
        let e = crump_hove(&s, 16, 5).unwrap();
        assert_eq!(e.ratio, Some((130, 108)));
        assert!((e.value - 1.2037).abs() < 1e-4);
        assert_eq!(e.observed_through(), 21);
        assert!(crump_hove(&s, 17, 5).is_err());
        let flat = CaseSeries::from_counts(vec![9; 12]);
        assert_eq!(crump_hove(&flat, 3, 4).unwrap().value, 1.0);
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let s = CaseSeries::from_counts(vec![0, 0, 3, 4]);
        assert!(harris(&s, 2).is_err());
        assert!(harris(&s, 3).is_ok());
        assert!(crump_hove(&s, 1, 2).is_err());
        assert!(crump_hove(&s, 2, 2).is_ok());
    }

    #[test]
    fn path_examples() {
        let flat = CaseSeries::from_counts(vec![5; 15]);
        for kind in EstimatorKind::ALL {
            let path = estimator_path(&flat, kind, 3).unwrap();
            assert!(path.estimates.iter().all(|e| e.value == 1.0));
            assert!(path.skipped.is_empty());
        }
        let path = estimator_path(&bulgaria(), EstimatorKind::Harris, 5).unwrap();
        assert_eq!(path.estimates.len(), 20);
        assert_eq!(path.last().unwrap().ratio, Some((327, 293)));
        let ln = estimator_path(&bulgaria(), EstimatorKind::LotkaNagaev, 5).unwrap();
        assert_eq!(ln.skipped, vec![2]);
        let two = CaseSeries::from_counts(vec![2, 4]);
        let ln = estimator_path(&two, EstimatorKind::LotkaNagaev, 5).unwrap();
        assert_eq!(ln.estimates.len(), 1);
        assert_eq!(ln.estimates[0].value, 2.0);
        assert!(matches!(
            estimator_path(&CaseSeries::from_counts(vec![4]), EstimatorKind::Harris, 5),
            Err(EstimateError::InsufficientData(_))
        ));
    }

    #[test]
    fn parse_kind() {
        assert_eq!("lotka-nagaev".parse::<EstimatorKind>().unwrap(), EstimatorKind::LotkaNagaev);
        assert_eq!("crump_hove".parse::<EstimatorKind>().unwrap(), EstimatorKind::CrumpHove);
        assert!("mle".parse::<EstimatorKind>().is_err());
    }

    fn positive_series() -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::vec(1u64..10_000, 3..40)
    }

    proptest! {
        #[test]
        fn harris_integer_identity(z in proptest::collection::vec(0u64..10_000, 2..40), pick in 0usize..1000) {
            let s = CaseSeries::from_counts(z.clone());
            let n = 1 + pick % (z.len() - 1);
            if let Ok(e) = harris(&s, n) {
                let (num, den) = e.ratio.unwrap();
                prop_assert_eq!(den, s.cumulative(n).unwrap());
                prop_assert_eq!(num, s.cumulative(n + 1).unwrap() - z[0]);
            } else {
                prop_assert_eq!(s.cumulative(n).unwrap(), 0);
            }
        }

        #[test]
        fn crump_hove_unit_window_is_lotka_nagaev(z in positive_series(), pick in 0usize..1000) {
            let s = CaseSeries::from_counts(z.clone());
            let n = 1 + pick % (z.len() - 1);
            prop_assert_eq!(crump_hove(&s, n, 1).unwrap().value, lotka_nagaev(&s, n).unwrap().value);
        }

        #[test]
        fn estimators_are_scale_free(z in positive_series(), c in 1u64..1000, pick in 0usize..1000) {
            let s = CaseSeries::from_counts(z.clone());
            let scaled = CaseSeries::from_counts(z.iter().map(|x| x * c).collect());
            let n = 1 + pick % (z.len() - 2);
            for kind in EstimatorKind::ALL {
                let window = 2;
                let a = estimate_at(&s, kind, n.min(z.len() - window), window).unwrap().value;
                let b = estimate_at(&scaled, kind, n.min(z.len() - window), window).unwrap().value;
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn geometric_series_recovered(r in 2u64..6, len in 3usize..15) {
            let z: Vec<u64> = (1..=len as u32).map(|i| r.pow(i)).collect();
            let s = CaseSeries::from_counts(z);
            for kind in EstimatorKind::ALL {
                let e = final_estimate(&s, kind, 2).unwrap();
                prop_assert_eq!(e.value, r as f64);
            }
        }
    }
}
