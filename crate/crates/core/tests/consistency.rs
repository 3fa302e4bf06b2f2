//! Harris estimator recovers the offspring mean from simulated registrations.

use covbranch::estimate::{harris, CaseSeries};
use covbranch::model::{calibrate, CalibrationFamily, InitialPopulation, ModelConfig};
use covbranch::simulate::simulate_replicate;

#[test]
fn harris_median_error_is_small() {
    let m = 1.2;
    let law = calibrate(CalibrationFamily::Geometric, m, 0.3).unwrap();
    let config = ModelConfig::new(law, InitialPopulation::fixed(100).unwrap(), 40);
    let mut errors: Vec<f64> = (0..200)
        .map(|rep| {
            let path = simulate_replicate(&config, 20_201, rep).unwrap();
            let series = CaseSeries::from_counts(path.registered().to_vec());
            harris(&series, 39).map(|e| (e.value - m).abs()).unwrap_or(f64::INFINITY)
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    let median = (errors[99] + errors[100]) / 2.0;
    assert!(median < 0.05, "median absolute error {median}");
}
