//! Offspring laws, generating functions, exact small-instance laws and the
//! theoretical moments of the two-type contamination process.

mod calibrate;
mod exact;
mod law;
mod pgf;

use thiserror::Error;

pub use calibrate::{calibrate, classify, max_registration, CalibrationFamily, Criticality};
pub use exact::{
    exact_distribution, exact_distribution_rational, pgf_of, propagate, ExactDistribution,
    Probability, RationalLaw, MAX_DEFICIT,
};
pub use law::{Contamination, Family, InitialPopulation, OffspringLaw, MASS_TOLERANCE};
pub use pgf::{
    mean_offspring, pgf_iterate, pgf_joint, pgf_marginal_t1, pgf_marginal_t2, process_pgf,
    registered_pgf, theoretical_means, Means, ProcessPgf,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("argument {name} = {value} outside [0, 1]")]
    OutOfDomain { name: &'static str, value: f64 },
    #[error("{0}")]
    Domain(String),
    #[error("support cap {cap} too small: mass {deficit:e} lies beyond it")]
    Truncation { cap: usize, deficit: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("cannot calibrate {family} law to m = {target_m} with q = {q}: feasible q <= {max_q}")]
    Calibration {
        family: String,
        target_m: f64,
        q: f64,
        max_q: f64,
    },
}

/// Model configuration shared by the simulator and the command line.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub law: OffspringLaw,
    pub init: InitialPopulation,
    /// Number of simulated days after day 0.
    pub days: usize,
    /// Largest tolerated number of contaminated individuals on a single day.
    #[serde(default = "default_cap")]
    pub cap: u64,
}

pub const DEFAULT_POPULATION_CAP: u64 = 100_000_000;

fn default_cap() -> u64 {
    DEFAULT_POPULATION_CAP
}

impl ModelConfig {
    pub fn new(law: OffspringLaw, init: InitialPopulation, days: usize) -> Self {
        Self {
            law,
            init,
            days,
            cap: DEFAULT_POPULATION_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }
}
