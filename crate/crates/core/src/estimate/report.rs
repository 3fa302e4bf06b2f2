use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{BacktestRow, CaseSeries, EstimateError, EstimatorKind, EstimatorPath, Forecast, MeanEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub length: usize,
    pub total: u64,
    pub zero_days: Vec<usize>,
    pub corrections: usize,
}

impl SeriesMeta {
    pub fn of(series: &CaseSeries) -> Self {
        Self {
            label: series.label().map(str::to_owned),
            start: (!series.is_empty()).then(|| series.start()),
            end: series.end(),
            length: series.len(),
            total: series.total(),
            zero_days: (1..=series.len()).filter(|&d| series.count(d) == Some(0)).collect(),
            corrections: series.corrections().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub base_day: usize,
    pub horizon: usize,
    pub forecasts: Vec<Forecast>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub day: usize,
    pub date: NaiveDate,
    pub estimator: EstimatorKind,
    pub alpha: f64,
}

/// Everything computed for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub series_meta: SeriesMeta,
    pub estimator_paths: Vec<EstimatorPath>,
    pub point_estimates: Vec<MeanEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forecast: Option<ForecastSet>,
    pub alpha_path: Vec<AlphaPoint>,
    pub backtest: Vec<BacktestRow>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl EstimateReport {
    pub fn new(series: &CaseSeries) -> Self {
        Self {
            series_meta: SeriesMeta::of(series),
            estimator_paths: Vec::new(),
            point_estimates: Vec::new(),
            forecast: None,
            alpha_path: Vec::new(),
            backtest: Vec::new(),
        }
    }

    /// Stores the forecasts and derives the alpha path from their observed days.
    pub fn set_forecast(&mut self, set: ForecastSet) {
        self.alpha_path = set
            .forecasts
            .iter()
            .flat_map(|f| {
                f.points.iter().filter_map(move |p| {
                    p.alpha_hat.map(|alpha| AlphaPoint {
                        day: p.day,
                        date: p.date,
                        estimator: f.mean.kind,
                        alpha,
                    })
                })
            })
            .collect();
        self.forecast = Some(set);
    }

    pub fn to_json(&self) -> Result<String, EstimateError> {
        serde_json::to_string_pretty(self).map_err(|e| EstimateError::Io(e.to_string()))
    }

    /// Estimator paths against the last observed day each estimate uses:
    /// `day,date,<estimator>...`, blank where undefined.
    pub fn write_m_dynamics<W: Write>(&self, series: &CaseSeries, out: W) -> Result<(), EstimateError> {
        let mut table: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
        let width = self.estimator_paths.len();
        for (col, path) in self.estimator_paths.iter().enumerate() {
            for e in &path.estimates {
                table.entry(e.observed_through()).or_insert_with(|| vec![None; width])[col] = Some(e.value);
            }
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["day".to_string(), "date".to_string()];
        header.extend(self.estimator_paths.iter().map(|p| p.kind.to_string()));
        w.write_record(&header)?;
        for (day, values) in table {
            let mut record = vec![day.to_string(), series.date(day).to_string()];
            record.extend(values.into_iter().map(fmt_opt));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `day,date,observed,<estimator>...` with the projected unregistered means.
    pub fn write_mean_unregistered<W: Write>(&self, out: W) -> Result<(), EstimateError> {
        let mut w = csv::Writer::from_writer(out);
        let forecasts = self.forecast.as_ref().map(|f| f.forecasts.as_slice()).unwrap_or(&[]);
        let mut header = vec!["day".to_string(), "date".to_string(), "observed".to_string()];
        header.extend(forecasts.iter().map(|f| f.mean.kind.to_string()));
        w.write_record(&header)?;
        if let Some(first) = forecasts.first() {
            for (i, p) in first.points.iter().enumerate() {
                let mut record = vec![
                    p.day.to_string(),
                    p.date.to_string(),
                    p.observed.map(|o| o.to_string()).unwrap_or_default(),
                ];
                record.extend(forecasts.iter().map(|f| f.points[i].m1_hat.to_string()));
                w.write_record(&record)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `day,date,<estimator>...` registered proportions on observed days.
    pub fn write_alpha<W: Write>(&self, out: W) -> Result<(), EstimateError> {
        let kinds: Vec<EstimatorKind> = self
            .forecast
            .iter()
            .flat_map(|f| f.forecasts.iter().map(|x| x.mean.kind))
            .collect();
        let mut table: BTreeMap<(usize, NaiveDate), Vec<Option<f64>>> = BTreeMap::new();
        for a in &self.alpha_path {
            let col = kinds.iter().position(|&k| k == a.estimator).expect("alpha from a forecast");
            table.entry((a.day, a.date)).or_insert_with(|| vec![None; kinds.len()])[col] = Some(a.alpha);
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["day".to_string(), "date".to_string()];
        header.extend(kinds.iter().map(|k| k.to_string()));
        w.write_record(&header)?;
        for ((day, date), values) in table {
            let mut record = vec![day.to_string(), date.to_string()];
            record.extend(values.into_iter().map(fmt_opt));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `k,day,date,predicted,observed,mean,lower,upper`.
    pub fn write_backtest<W: Write>(&self, out: W) -> Result<(), EstimateError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "day", "date", "predicted", "observed", "mean", "lower", "upper"])?;
        for r in &self.backtest {
            w.write_record([
                r.k.to_string(),
                r.day.to_string(),
                r.date.to_string(),
                r.predicted.to_string(),
                r.observed.to_string(),
                r.mean.to_string(),
                r.lower.map(|x| x.to_string()).unwrap_or_default(),
                r.upper.map(|x| x.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{bulgaria, estimator_path, forecast_unregistered, harris};

    #[test]
    fn meta_and_csv_shapes() {
        let s = bulgaria();
        let mut report = EstimateReport::new(&s);
        assert_eq!(report.series_meta.zero_days, vec![2]);
        assert_eq!(report.series_meta.total, 331);
        for kind in EstimatorKind::ALL {
            report.estimator_paths.push(estimator_path(&s, kind, 5).unwrap());
        }
        let m = harris(&s, 20).unwrap();
        report.set_forecast(ForecastSet {
            base_day: 10,
            horizon: 15,
            forecasts: vec![forecast_unregistered(&s, 10, 15, &m).unwrap()],
        });
        assert_eq!(report.alpha_path.len(), 12);

        let mut buf = Vec::new();
        report.write_m_dynamics(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "day,date,lotka_nagaev,harris,crump_hove");
        assert_eq!(lines.len(), 1 + 20);
        assert!(lines[1].starts_with("2,2020-03-09,0,0,"));
        assert!(lines[2].starts_with("3,2020-03-10,,"));

        let mut buf = Vec::new();
        report.write_mean_unregistered(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 16);

        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        for key in ["series_meta", "estimator_paths", "point_estimates", "forecast", "alpha_path", "backtest"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
