//! Two-type branching-process model of epidemic contamination.
//!
//! Contaminated individuals (type 1) are unobserved; every day each of them
//! either leaves the process, contaminates new individuals, or is registered
//! as a confirmed case (type 2), which is final. Only the daily registered
//! counts are observed.
//!
//! * [`model`]: offspring laws, generating functions, exact laws, means.
//! * [`simulate`]: seeded day-by-day simulation and Monte Carlo ensembles.
//! * [`estimate`]: estimators of the offspring mean, forecasts, backtests.
//! * [`ingest`]: CSV parsing and daily/cumulative conversions.

pub mod model;
pub mod simulate;
pub mod estimate;
pub mod ingest;
