use covbranch::estimate::{
    alpha, backtest, crump_hove, estimator_path, forecast_unregistered, harris, lotka_nagaev,
    BacktestProtocol, EstimatorKind, MeanEstimate,
};
use covbranch::ingest::{parse_csv, validate, ParseOptions, ValueKind};

const DAILY: &str = "4;0;2;1;16;8;10;10;11;19;11;18;17;36;22;16;19;22;22;29;38";
const TOTALS: &str = "4;4;6;7;23;31;41;51;62;81;92;110;127;163;185;201;220;242;264;293;331";

fn csv(list: &str) -> String {
    let start = chrono::NaiveDate::from_ymd_opt(2020, 3, 8).unwrap();
    let mut out = String::from("date,value\n");
    for (i, v) in list.split(';').enumerate() {
        out += &format!("{},{v}\n", start + chrono::Days::new(i as u64));
    }
    out
}

fn sum(list: &str, from: usize, to: usize) -> u64 {
    list.split(';').map(|x| x.parse::<u64>().unwrap()).skip(from - 1).take(to + 1 - from).sum()
}

#[test]
fn daily_and_cumulative_inputs_agree() {
    let daily = parse_csv(&csv(DAILY), &ParseOptions::default()).unwrap();
    let cumulative = parse_csv(
        &csv(TOTALS),
        &ParseOptions { value_kind: ValueKind::Cumulative, ..Default::default() },
    )
    .unwrap();
    assert_eq!(daily, cumulative);
    assert_eq!(daily.len(), 21);
    assert_eq!(daily.cumulative(21), Some(331));
    let report = validate(&daily);
    assert_eq!(report.zeros, vec![2]);
}

#[test]
fn estimator_values() {
    let s = parse_csv(&csv(DAILY), &ParseOptions::default()).unwrap();

    let h = harris(&s, 20).unwrap();
    let expected = sum(DAILY, 2, 21) as f64 / sum(DAILY, 1, 20) as f64;
    assert!((h.value - expected).abs() < 1e-12);
    assert!((h.value - 327.0 / 293.0).abs() < 1e-12);
    assert!((h.value - 1.1093).abs() < 0.01);

    let ln = lotka_nagaev(&s, 20).unwrap();
    assert!((ln.value - 38.0 / 29.0).abs() < 1e-12);
    assert!(lotka_nagaev(&s, 2).is_err());

    let ch = crump_hove(&s, 16, 5).unwrap();
    let expected = sum(DAILY, 17, 21) as f64 / sum(DAILY, 16, 20) as f64;
    assert!((ch.value - expected).abs() < 1e-12);

    let path = estimator_path(&s, EstimatorKind::Harris, 5).unwrap();
    assert_eq!(path.last().unwrap().value, h.value);
}

#[test]
fn backtest_and_proportion() {
    let s = parse_csv(&csv(DAILY), &ParseOptions::default()).unwrap();
    let rows = backtest(&s, 4, Some(1.1093), BacktestProtocol::FullSample).unwrap();
    let got: Vec<(usize, u64, u64)> = rows.iter().map(|r| (r.k, r.predicted, r.observed)).collect();
    assert_eq!(got, vec![(4, 21, 22), (3, 24, 22), (2, 24, 29), (1, 32, 38)]);
    assert!((alpha(38.0, 31.0).unwrap() - 0.5507).abs() < 5e-5);

    let m = MeanEstimate::fixed(EstimatorKind::Harris, 1.1093, 20);
    let f = forecast_unregistered(&s, 20, 5, &m).unwrap();
    assert!((f.points[1].m1_hat - 29.0 * 1.1093).abs() < 1e-12);
    assert_eq!(f.points.len(), 6);
}
