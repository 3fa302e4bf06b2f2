use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

/// A value changed while reading the input, e.g. a negative daily count
/// clamped to zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub line: Option<u64>,
    pub date: NaiveDate,
    pub original: i64,
    pub corrected: u64,
}

/// Observed daily registered counts `Z2(1..n)` on consecutive calendar days.
///
/// Days are 1-based: day 1 is the first entry and falls on [`start`](Self::start).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSeries {
    label: Option<String>,
    start: NaiveDate,
    daily: Vec<u64>,
    cumulative: Vec<u64>,
    corrections: Vec<Correction>,
}

impl CaseSeries {
    pub fn new(start: NaiveDate, daily: Vec<u64>) -> Self {
        let cumulative = crate::ingest::cumulative_from_daily(&daily);
        Self {
            label: None,
            start,
            daily,
            cumulative,
            corrections: Vec::new(),
        }
    }

    /// Series with an arbitrary start date, for synthetic data.
    pub fn from_counts(daily: Vec<u64>) -> Self {
        Self::new(NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date"), daily)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_corrections(mut self, corrections: Vec<Correction>) -> Self {
        self.corrections = corrections;
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn len(&self) -> usize {
        self.daily.len()
    }

    pub fn is_empty(&self) -> bool {
        self.daily.is_empty()
    }

    /// `Z2(day)` for `1 <= day <= len`.
    pub fn count(&self, day: usize) -> Option<u64> {
        day.checked_sub(1).and_then(|i| self.daily.get(i)).copied()
    }

    /// `U(k) = Z2(1) + .. + Z2(k)`, with `U(0) = 0`.
    pub fn cumulative(&self, k: usize) -> Option<u64> {
        match k {
            0 => Some(0),
            _ => self.cumulative.get(k - 1).copied(),
        }
    }

    pub fn daily(&self) -> &[u64] {
        &self.daily
    }

    pub fn cumulative_counts(&self) -> &[u64] {
        &self.cumulative
    }

    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn corrections(&self) -> &[Correction] {
        &self.corrections
    }

    /// Calendar date of `day` (1-based; day 0 is the day before the first entry).
    pub fn date(&self, day: usize) -> NaiveDate {
        if day == 0 {
            self.start - Days::new(1)
        } else {
            self.start + Days::new(day as u64 - 1)
        }
    }

    pub fn end(&self) -> Option<NaiveDate> {
        (!self.is_empty()).then(|| self.date(self.len()))
    }

    /// Day index of `date`, if it falls inside the series.
    pub fn day_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start).num_days();
        (offset >= 0 && (offset as usize) < self.len()).then_some(offset as usize + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_one_based() {
        let s = CaseSeries::new(NaiveDate::from_ymd_opt(2020, 3, 8).unwrap(), vec![4, 0, 2]);
        assert_eq!(s.count(0), None);
        assert_eq!(s.count(1), Some(4));
        assert_eq!(s.count(3), Some(2));
        assert_eq!(s.count(4), None);
        assert_eq!(s.cumulative(0), Some(0));
        assert_eq!(s.cumulative(3), Some(6));
        assert_eq!(s.date(3), NaiveDate::from_ymd_opt(2020, 3, 10).unwrap());
        assert_eq!(s.day_of(NaiveDate::from_ymd_opt(2020, 3, 9).unwrap()), Some(2));
        assert_eq!(s.day_of(NaiveDate::from_ymd_opt(2020, 3, 11).unwrap()), None);
        assert_eq!(s.total(), 6);
    }
}
