use serde::{Deserialize, Serialize};

use super::{ModelError, OffspringLaw};

/// Families that can be fitted to a target offspring mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationFamily {
    /// Exit, registration and a single contamination outcome of size two.
    Finite2,
    Geometric,
    Poisson,
}

impl std::str::FromStr for CalibrationFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "finite2" => Ok(Self::Finite2),
            "geometric" => Ok(Self::Geometric),
            "poisson" => Ok(Self::Poisson),
            other => Err(format!(
                "unknown family `{other}`, expected finite2, geometric or poisson"
            )),
        }
    }
}

impl std::fmt::Display for CalibrationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Finite2 => "finite2",
            Self::Geometric => "geometric",
            Self::Poisson => "poisson",
        })
    }
}

/// Largest registration probability compatible with `target_m` in `family`.
pub fn max_registration(family: CalibrationFamily, target_m: f64) -> f64 {
    match family {
        CalibrationFamily::Finite2 => 1.0 - target_m / 2.0,
        CalibrationFamily::Geometric => 1.0 / (1.0 + target_m),
        CalibrationFamily::Poisson => (-target_m).exp(),
    }
}

/// Builds a law of the given family with mean `target_m` and registration
/// probability `q`; the exit mass takes up the remainder.
pub fn calibrate(family: CalibrationFamily, target_m: f64, q: f64) -> Result<OffspringLaw, ModelError> {
    if !(target_m.is_finite() && target_m > 0.0) {
        return Err(ModelError::InvalidLaw(format!(
            "target mean {target_m} must be positive"
        )));
    }
    let max_q = max_registration(family, target_m);
    if !(0.0..=1.0).contains(&q) || q > max_q {
        return Err(ModelError::Calibration {
            family: family.to_string(),
            target_m,
            q,
            max_q: max_q.max(0.0),
        });
    }
    match family {
        CalibrationFamily::Finite2 => {
            let p2 = target_m / 2.0;
            let p0 = (1.0 - q - p2).max(0.0);
            OffspringLaw::finite(p0, vec![0.0, p2], q)
        }
        CalibrationFamily::Geometric => {
            let p = target_m / (1.0 + target_m);
            let p0 = (1.0 - p - q).max(0.0);
            OffspringLaw::geometric(p0, q, p, None)
        }
        CalibrationFamily::Poisson => {
            let p0 = ((-target_m).exp() - q).max(0.0);
            OffspringLaw::poisson(p0, q, target_m, None)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Criticality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Criticality::Subcritical => "subcritical",
            Criticality::Critical => "critical",
            Criticality::Supercritical => "supercritical",
        })
    }
}

/// Exact trichotomy on `m` versus one; no tolerance band.
pub fn classify(m: f64) -> Criticality {
    match m.partial_cmp(&1.0) {
        Some(std::cmp::Ordering::Greater) => Criticality::Supercritical,
        Some(std::cmp::Ordering::Equal) => Criticality::Critical,
        _ => Criticality::Subcritical,
    }
}
