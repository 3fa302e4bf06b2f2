//! Reading case counts from CSV.
//!
//! Input has a header row with columns `date,value` and an optional `region`
//! column. Dates are ISO `YYYY-MM-DD`; values are integer counts, either
//! daily new cases or running totals.

use std::collections::BTreeSet;
use std::io::Write;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{CaseSeries, Correction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing required column `{0}` in header")]
    MissingColumn(&'static str),
    #[error("line {line}: duplicate date {date}")]
    Duplicate { line: u64, date: NaiveDate },
    #[error("line {line}: dates jump from {previous} to {date}; use fill-missing-zero to insert zero days")]
    Gap { line: u64, previous: NaiveDate, date: NaiveDate },
    #[error("line {line}: negative count {value} on {date}; use allow-corrections to clamp it")]
    Negative { line: u64, date: NaiveDate, value: i64 },
    #[error("cumulative count decreases at position {index}: {previous} then {value}")]
    Decreasing { index: usize, previous: u64, value: u64 },
    #[error("input has several regions ({}); select one", .0.join(", "))]
    AmbiguousRegion(Vec<String>),
    #[error("no rows{}", .0.as_ref().map(|r| format!(" for region `{r}`")).unwrap_or_default())]
    Empty(Option<String>),
    #[error("region `{0}` requested but the input has no region column")]
    NoRegionColumn(String),
    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        match e.position() {
            Some(p) => IngestError::Row { line: p.line(), message: e.to_string() },
            None => IngestError::Csv(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    #[default]
    Daily,
    Cumulative,
}

impl std::str::FromStr for ValueKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "daily" => Ok(ValueKind::Daily),
            "cumulative" => Ok(ValueKind::Cumulative),
            other => Err(format!("unknown value kind `{other}`, expected daily or cumulative")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseOptions {
    pub value_kind: ValueKind,
    pub region: Option<String>,
    /// Insert zero counts for missing dates instead of failing.
    pub fill_missing_zero: bool,
    /// Clamp negative daily counts (or decreasing totals) instead of failing.
    pub allow_corrections: bool,
    /// Keep zero days before the first positive count.
    pub keep_leading_zeros: bool,
}

/// Running totals.
pub fn cumulative_from_daily(daily: &[u64]) -> Vec<u64> {
    daily
        .iter()
        .scan(0u64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// First differences, with the first total kept as the first daily count.
pub fn daily_from_cumulative(cumulative: &[u64]) -> Result<Vec<u64>, IngestError> {
    let mut out = Vec::with_capacity(cumulative.len());
    let mut previous = 0;
    for (index, &value) in cumulative.iter().enumerate() {
        if value < previous {
            return Err(IngestError::Decreasing { index, previous, value });
        }
        out.push(value - previous);
        previous = value;
    }
    Ok(out)
}

/// Like [`daily_from_cumulative`], but a total below the running maximum is
/// treated as a revision: that day counts zero and later days are measured
/// against the maximum. Returns the positions that were revised.
pub fn daily_from_cumulative_clamped(cumulative: &[u64]) -> (Vec<u64>, Vec<usize>) {
    let mut out = Vec::with_capacity(cumulative.len());
    let mut revised = Vec::new();
    let mut high = 0;
    for (index, &value) in cumulative.iter().enumerate() {
        if value < high {
            revised.push(index);
            out.push(0);
        } else {
            out.push(value - high);
            high = value;
        }
    }
    (out, revised)
}

struct Row {
    line: u64,
    date: NaiveDate,
    value: i64,
}

fn read_rows(content: &str, region: Option<&str>) -> Result<Vec<Row>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(content.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let date_col = column("date").ok_or(IngestError::MissingColumn("date"))?;
    let value_col = column("value").ok_or(IngestError::MissingColumn("value"))?;
    let region_col = column("region");
    if let (Some(r), None) = (region, region_col) {
        return Err(IngestError::NoRegionColumn(r.to_owned()));
    }

    let mut rows = Vec::new();
    let mut regions = BTreeSet::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");
        if let Some(rc) = region_col {
            let name = field(rc);
            match region {
                Some(wanted) if name != wanted => continue,
                Some(_) => {}
                None => {
                    regions.insert(name.to_owned());
                }
            }
        }
        let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d").map_err(|e| IngestError::Row {
            line,
            message: format!("bad date `{}`: {e}", field(date_col)),
        })?;
        let value = field(value_col).parse::<i64>().map_err(|e| IngestError::Row {
            line,
            message: format!("bad count `{}`: {e}", field(value_col)),
        })?;
        rows.push(Row { line, date, value });
    }
    if regions.len() > 1 {
        return Err(IngestError::AmbiguousRegion(regions.into_iter().collect()));
    }
    Ok(rows)
}

/// Parses `content` into a contiguous daily series.
pub fn parse_csv(content: &str, options: &ParseOptions) -> Result<CaseSeries, IngestError> {
    let mut rows = read_rows(content, options.region.as_deref())?;
    if rows.is_empty() {
        return Err(IngestError::Empty(options.region.clone()));
    }
    rows.sort_by_key(|r| (r.date, r.line));

    let mut values: Vec<(NaiveDate, u64)> = Vec::with_capacity(rows.len());
    let mut corrections = Vec::new();
    let mut previous: Option<&Row> = None;
    for row in &rows {
        if let Some(prev) = previous {
            if row.date == prev.date {
                return Err(IngestError::Duplicate { line: row.line, date: row.date });
            }
            let expected = prev.date + Days::new(1);
            if row.date != expected {
                if !options.fill_missing_zero {
                    return Err(IngestError::Gap { line: row.line, previous: prev.date, date: row.date });
                }
                let mut d = expected;
                while d < row.date {
                    // a missing total repeats the last one, a missing daily count is zero
                    let fill = match options.value_kind {
                        ValueKind::Daily => 0,
                        ValueKind::Cumulative => values.last().map(|v| v.1).unwrap_or(0),
                    };
                    values.push((d, fill));
                    d = d + Days::new(1);
                }
            }
        }
        let value = if row.value < 0 {
            if !options.allow_corrections {
                return Err(IngestError::Negative { line: row.line, date: row.date, value: row.value });
            }
            corrections.push(Correction {
                line: Some(row.line),
                date: row.date,
                original: row.value,
                corrected: 0,
            });
            0
        } else {
            row.value as u64
        };
        values.push((row.date, value));
        previous = Some(row);
    }

    let start = values[0].0;
    let raw: Vec<u64> = values.iter().map(|v| v.1).collect();
    let mut daily = match options.value_kind {
        ValueKind::Daily => raw,
        ValueKind::Cumulative if options.allow_corrections => {
            let (daily, revised) = daily_from_cumulative_clamped(&raw);
            for i in revised {
                let line = rows.iter().find(|r| r.date == values[i].0).map(|r| r.line);
                corrections.push(Correction {
                    line,
                    date: values[i].0,
                    original: raw[i] as i64 - raw[..i].iter().max().copied().unwrap_or(0) as i64,
                    corrected: 0,
                });
            }
            daily
        }
        ValueKind::Cumulative => daily_from_cumulative(&raw)?,
    };

    let mut start = start;
    if !options.keep_leading_zeros {
        if let Some(first) = daily.iter().position(|&x| x > 0) {
            daily.drain(..first);
            start = start + Days::new(first as u64);
        }
    }
    let mut series = CaseSeries::new(start, daily).with_corrections(corrections);
    if let Some(r) = &options.region {
        series = series.with_label(r.clone());
    }
    Ok(series)
}

/// Writes the series as `date,value` daily counts.
pub fn write_csv<W: Write>(series: &CaseSeries, out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "value"])?;
    for (i, x) in series.daily().iter().enumerate() {
        w.write_record([series.date(i + 1).to_string(), x.to_string()])?;
    }
    w.flush().map_err(|e| IngestError::Csv(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub length: usize,
    pub total: u64,
    /// Days (1-based) with no registered cases.
    pub zeros: Vec<usize>,
    /// Zero days before the first positive count, which could be trimmed.
    pub leading_zeros: usize,
    /// At least two days and one registered case.
    pub usable: bool,
    pub warnings: Vec<String>,
}

pub fn validate(series: &CaseSeries) -> ValidationReport {
    let daily = series.daily();
    let zeros: Vec<usize> = (1..=daily.len()).filter(|&d| daily[d - 1] == 0).collect();
    let leading_zeros = daily.iter().take_while(|&&x| x == 0).count();
    let mut warnings: Vec<String> = series
        .corrections()
        .iter()
        .map(|c| match c.line {
            Some(line) => format!("line {line}: {} on {} corrected to {}", c.original, c.date, c.corrected),
            None => format!("{} on {} corrected to {}", c.original, c.date, c.corrected),
        })
        .collect();
    if leading_zeros > 0 && leading_zeros < daily.len() {
        warnings.push(format!("{leading_zeros} leading zero days could be trimmed"));
    }
    let usable = daily.len() >= 2 && series.total() > 0;
    if !usable {
        warnings.push("series is too short or has no cases for estimation".into());
    }
    ValidationReport {
        length: daily.len(),
        total: series.total(),
        zeros,
        leading_zeros,
        usable,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BULGARIA: [u64; 21] = [4, 0, 2, 1, 16, 8, 10, 10, 11, 19, 11, 18, 17, 36, 22, 16, 19, 22, 22, 29, 38];
    const BULGARIA_TOTALS: [u64; 21] = [
        4, 4, 6, 7, 23, 31, 41, 51, 62, 81, 92, 110, 127, 163, 185, 201, 220, 242, 264, 293, 331,
    ];

    fn csv_of(values: &[u64]) -> String {
        let start = NaiveDate::from_ymd_opt(2020, 3, 8).unwrap();
        let mut s = String::from("date,value\n");
        for (i, v) in values.iter().enumerate() {
            s += &format!("{},{v}\n", start + Days::new(i as u64));
        }
        s
    }

    #[test]
    fn conversions() {
        assert_eq!(cumulative_from_daily(&BULGARIA), BULGARIA_TOTALS);
        assert_eq!(daily_from_cumulative(&BULGARIA_TOTALS).unwrap(), BULGARIA);
        assert_eq!(daily_from_cumulative(&[4, 4, 6]).unwrap(), vec![4, 0, 2]);
        assert_eq!(daily_from_cumulative(&[9]).unwrap(), vec![9]);
        assert_eq!(
            daily_from_cumulative(&[5, 3]),
            Err(IngestError::Decreasing { index: 1, previous: 5, value: 3 })
        );
        assert_eq!(cumulative_from_daily(&[0, 0, 0]), vec![0, 0, 0]);
        assert_eq!(cumulative_from_daily(&[1, 1, 1]), vec![1, 2, 3]);
        assert_eq!(daily_from_cumulative_clamped(&[5, 3, 6]), (vec![5, 0, 1], vec![1]));
    }

    #[test]
    fn parses_daily_and_cumulative() {
        let s = parse_csv(&csv_of(&BULGARIA), &ParseOptions::default()).unwrap();
        assert_eq!(s.len(), 21);
        assert_eq!(s.cumulative(21), Some(331));
        assert_eq!(s.start(), NaiveDate::from_ymd_opt(2020, 3, 8).unwrap());
        let options = ParseOptions { value_kind: ValueKind::Cumulative, ..Default::default() };
        let c = parse_csv(&csv_of(&BULGARIA_TOTALS), &options).unwrap();
        assert_eq!(c.daily(), BULGARIA);
        let single = parse_csv("date,value\n2020-01-05,3\n", &ParseOptions::default()).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn reports_row_errors_with_lines() {
        let opts = ParseOptions::default();
        let bad = "date,value\n2020-01-01,1\n2020-01-02,x\n";
        assert!(matches!(parse_csv(bad, &opts), Err(IngestError::Row { line: 3, .. })));
        let bad_date = "date,value\n2020-13-01,1\n";
        assert!(matches!(parse_csv(bad_date, &opts), Err(IngestError::Row { line: 2, .. })));
        let gap = "date,value\n2020-01-01,1\n2020-01-03,2\n";
        assert!(matches!(parse_csv(gap, &opts), Err(IngestError::Gap { line: 3, .. })));
        let dup = "date,value\n2020-01-01,1\n2020-01-01,2\n";
        assert!(matches!(parse_csv(dup, &opts), Err(IngestError::Duplicate { line: 3, .. })));
        let neg = "date,value\n2020-01-01,1\n2020-01-02,-2\n";
        assert!(matches!(parse_csv(neg, &opts), Err(IngestError::Negative { line: 3, value: -2, .. })));
        assert_eq!(parse_csv("day,value\n", &opts), Err(IngestError::MissingColumn("date")));
        assert_eq!(parse_csv("date,value\n", &opts), Err(IngestError::Empty(None)));
    }

    #[test]
    fn fills_gaps_and_clamps_on_request() {
        let opts = ParseOptions { fill_missing_zero: true, allow_corrections: true, ..Default::default() };
        let s = parse_csv("date,value\n2020-01-04,-1\n2020-01-01,1\n2020-01-03,2\n", &opts).unwrap();
        assert_eq!(s.daily(), [1, 0, 2, 0]);
        assert_eq!(s.corrections().len(), 1);
        assert_eq!(s.corrections()[0].line, Some(2));
        let report = validate(&s);
        assert!(report.warnings.iter().any(|w| w.contains("line 2")));

        let cum = ParseOptions { value_kind: ValueKind::Cumulative, ..opts };
        let s = parse_csv("date,value\n2020-01-01,5\n2020-01-03,3\n2020-01-04,8\n", &cum).unwrap();
        assert_eq!(s.daily(), [5, 0, 0, 3]);
        assert_eq!(s.corrections()[0].original, -2);
    }

    #[test]
    fn trims_leading_zeros_by_default() {
        let text = csv_of(&[0, 0, 3, 1]);
        let s = parse_csv(&text, &ParseOptions::default()).unwrap();
        assert_eq!(s.daily(), [3, 1]);
        assert_eq!(s.start(), NaiveDate::from_ymd_opt(2020, 3, 10).unwrap());
        let keep = ParseOptions { keep_leading_zeros: true, ..Default::default() };
        let s = parse_csv(&text, &keep).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(validate(&s).leading_zeros, 2);
    }

    #[test]
    fn regions() {
        let text = "date,value,region\n2020-01-01,1,A\n2020-01-01,5,B\n2020-01-02,2,A\n2020-01-02,6,B\n";
        let opts = ParseOptions::default();
        assert!(matches!(parse_csv(text, &opts), Err(IngestError::AmbiguousRegion(r)) if r == ["A", "B"]));
        let b = ParseOptions { region: Some("B".into()), ..Default::default() };
        let s = parse_csv(text, &b).unwrap();
        assert_eq!(s.daily(), [5, 6]);
        assert_eq!(s.label(), Some("B"));
        let c = ParseOptions { region: Some("C".into()), ..Default::default() };
        assert_eq!(parse_csv(text, &c), Err(IngestError::Empty(Some("C".into()))));
        assert!(matches!(
            parse_csv("date,value\n2020-01-01,1\n", &b),
            Err(IngestError::NoRegionColumn(_))
        ));
    }

    #[test]
    fn validation_examples() {
        let s = CaseSeries::from_counts(BULGARIA.to_vec());
        let r = validate(&s);
        assert_eq!((r.length, r.total, r.zeros.clone()), (21, 331, vec![2]));
        assert!(r.usable);
        let empty = validate(&CaseSeries::from_counts(vec![]));
        assert_eq!(empty.length, 0);
        assert!(!empty.usable);
    }

    #[test]
    fn write_then_parse() {
        let s = CaseSeries::from_counts(BULGARIA.to_vec());
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = parse_csv(std::str::from_utf8(&buf).unwrap(), &ParseOptions::default()).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn conversions_are_inverse(daily in proptest::collection::vec(0u64..1_000_000, 0..60)) {
            let totals = cumulative_from_daily(&daily);
            prop_assert_eq!(daily_from_cumulative(&totals).unwrap(), daily);
            let (clamped, revised) = daily_from_cumulative_clamped(&totals);
            prop_assert!(revised.is_empty());
            prop_assert_eq!(cumulative_from_daily(&clamped), totals);
        }

        #[test]
        fn region_filter_commutes(a in proptest::collection::vec(1u64..100, 1..20), b in proptest::collection::vec(1u64..100, 1..20)) {
            let start = NaiveDate::from_ymd_opt(2021, 6, 1).unwrap();
            let mut mixed = String::from("date,value,region\n");
            for (i, (x, y)) in a.iter().zip(b.iter().chain(std::iter::repeat(&1))).enumerate() {
                let d = start + Days::new(i as u64);
                mixed += &format!("{d},{x},A\n{d},{y},B\n");
            }
            let only_a: String = std::iter::once("date,value,region")
                .chain(mixed.lines().skip(1).filter(|l| l.ends_with(",A")))
                .map(|l| format!("{l}\n"))
                .collect();
            let opts = ParseOptions { region: Some("A".into()), ..Default::default() };
            let x = parse_csv(&mixed, &opts).unwrap();
            let y = parse_csv(&only_a, &opts).unwrap();
            prop_assert_eq!(x.daily(), y.daily());
            prop_assert_eq!(x.daily(), &a[..]);
        }
    }
}
