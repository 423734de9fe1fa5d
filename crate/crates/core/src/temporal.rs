//! Period → timeseries → timepoint hierarchy and annualization weights.

use std::ops::Range;

use thiserror::Error;

/// Global ordinal of a timepoint in calendar order, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimepointId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Timeseries {
    pub id: String,
    pub num_timepoints: usize,
    pub hours_per_timepoint: f64,
    pub scale_to_year: f64,
}

impl Timeseries {
    pub fn new(id: impl Into<String>, num_timepoints: usize, hours: f64, scale: f64) -> Self {
        Self {
            id: id.into(),
            num_timepoints,
            hours_per_timepoint: hours,
            scale_to_year: scale,
        }
    }

    pub fn duration_hours(&self) -> f64 {
        self.num_timepoints as f64 * self.hours_per_timepoint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timepoint {
    pub id: TimepointId,
    /// Position of the owning series in [`Calendar::timeseries`].
    pub series: usize,
    pub index_in_series: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalendarConfig {
    pub period_label: String,
    pub period_years: f64,
    /// Hours the weights must add up to.
    pub annual_hours: f64,
    /// Accepted absolute deviation of the weight sum from `annual_hours`.
    pub tolerance_hours: f64,
}

impl Default for CalendarConfig {
    fn default() -> Self {
        Self {
            period_label: "2050".into(),
            period_years: 10.0,
            annual_hours: 8760.0,
            tolerance_hours: 10.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CalendarError {
    #[error("calendar needs at least one timeseries")]
    Empty,
    #[error("timeseries `{id}`: {field} must be positive, got {value}")]
    NonPositive { id: String, field: &'static str, value: f64 },
    #[error("duplicate timeseries id `{0}`")]
    DuplicateSeries(String),
    #[error("weights sum to {sum} h/yr, outside {target} ± {tolerance}")]
    WeightSum { sum: f64, target: f64, tolerance: f64 },
    #[error("unknown timepoint {0}")]
    UnknownTimepoint(usize),
}

/// Immutable once built; cheap to share across concurrent scenario solves.
#[derive(Debug, Clone, PartialEq)]
pub struct Calendar {
    pub period_label: String,
    pub period_years: f64,
    timeseries: Vec<Timeseries>,
    timepoints: Vec<Timepoint>,
    weights: Vec<f64>,
    ranges: Vec<Range<usize>>,
}

pub fn build_calendar(
    series_defs: Vec<Timeseries>,
    config: &CalendarConfig,
) -> Result<Calendar, CalendarError> {
    if series_defs.is_empty() {
        return Err(CalendarError::Empty);
    }
    let mut seen = std::collections::HashSet::new();
    let mut timepoints = Vec::new();
    let mut weights = Vec::new();
    let mut ranges = Vec::with_capacity(series_defs.len());
    for (s, ts) in series_defs.iter().enumerate() {
        if !seen.insert(ts.id.clone()) {
            return Err(CalendarError::DuplicateSeries(ts.id.clone()));
        }
        let checks = [
            ("num_timepoints", ts.num_timepoints as f64),
            ("hours_per_timepoint", ts.hours_per_timepoint),
            ("scale_to_year", ts.scale_to_year),
        ];
        for (field, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CalendarError::NonPositive { id: ts.id.clone(), field, value });
            }
        }
        let start = timepoints.len();
        let w = ts.hours_per_timepoint * ts.scale_to_year;
        for k in 0..ts.num_timepoints {
            timepoints.push(Timepoint {
                id: TimepointId(timepoints.len()),
                series: s,
                index_in_series: k,
            });
            weights.push(w);
        }
        ranges.push(start..timepoints.len());
    }
    let sum: f64 = weights.iter().sum();
    if (sum - config.annual_hours).abs() > config.tolerance_hours {
        return Err(CalendarError::WeightSum {
            sum,
            target: config.annual_hours,
            tolerance: config.tolerance_hours,
        });
    }
    Ok(Calendar {
        period_label: config.period_label.clone(),
        period_years: config.period_years,
        timeseries: series_defs,
        timepoints,
        weights,
        ranges,
    })
}

impl Calendar {
    pub fn len(&self) -> usize {
        self.timepoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timepoints.is_empty()
    }

    pub fn timepoints(&self) -> &[Timepoint] {
        &self.timepoints
    }

    pub fn timeseries(&self) -> &[Timeseries] {
        &self.timeseries
    }

    pub fn timepoint_weight(&self, t: TimepointId) -> Result<f64, CalendarError> {
        self.weights.get(t.0).copied().ok_or(CalendarError::UnknownTimepoint(t.0))
    }

    /// Weight of a timepoint known to belong to this calendar.
    pub fn weight(&self, t: usize) -> f64 {
        self.weights[t]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn hours(&self, t: usize) -> f64 {
        self.timeseries[self.timepoints[t].series].hours_per_timepoint
    }

    /// Timepoint index range of series `s`.
    pub fn series_range(&self, s: usize) -> Range<usize> {
        self.ranges[s].clone()
    }

    /// Predecessor within the same series, wrapping from the first timepoint
    /// to the last.
    pub fn prev_in_series(&self, t: usize) -> usize {
        let r = &self.ranges[self.timepoints[t].series];
        if t == r.start {
            r.end - 1
        } else {
            t - 1
        }
    }

    /// Predecessor in calendar order, wrapping from the first timepoint of the
    /// year to the last.
    pub fn prev_in_year(&self, t: usize) -> usize {
        if t == 0 {
            self.len() - 1
        } else {
            t - 1
        }
    }

    pub fn series_index(&self, id: &str) -> Option<usize> {
        self.timeseries.iter().position(|s| s.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fifty_two_weeks() {
        let defs: Vec<_> = (0..52)
            .map(|w| Timeseries::new(format!("w{w}"), 168, 1.0, 8760.0 / 8736.0))
            .collect();
        let cal = build_calendar(defs, &CalendarConfig::default()).unwrap();
        assert_eq!(cal.len(), 8736);
        assert!((cal.total_weight() - 8760.0).abs() < 1e-9);
    }

    #[test]
    fn single_day_and_two_half_days() {
        let cal = build_calendar(vec![Timeseries::new("d", 24, 1.0, 365.0)], &Default::default())
            .unwrap();
        assert_eq!(cal.total_weight(), 8760.0);
        let cal = build_calendar(
            vec![Timeseries::new("a", 12, 2.0, 182.5), Timeseries::new("b", 12, 2.0, 182.5)],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(cal.total_weight(), 8760.0);
        assert_eq!(cal.series_range(1), 12..24);
    }

    #[test]
    fn weights_and_lookup() {
        let cal =
            build_calendar(vec![Timeseries::new("w", 168, 1.0, 52.143)], &Default::default())
                .unwrap();
        assert_eq!(cal.timepoint_weight(TimepointId(5)).unwrap(), 52.143);
        assert_eq!(
            cal.timepoint_weight(TimepointId(168)),
            Err(CalendarError::UnknownTimepoint(168))
        );
        let cfg = CalendarConfig { annual_hours: 40.0, ..Default::default() };
        let cal = build_calendar(vec![Timeseries::new("x", 1, 4.0, 10.0)], &cfg).unwrap();
        assert_eq!(cal.timepoint_weight(TimepointId(0)).unwrap(), 40.0);
    }

    #[test]
    fn rejects_bad_definitions() {
        let cfg = CalendarConfig::default();
        assert_eq!(build_calendar(vec![], &cfg), Err(CalendarError::Empty));
        assert!(matches!(
            build_calendar(vec![Timeseries::new("z", 0, 1.0, 1.0)], &cfg),
            Err(CalendarError::NonPositive { field: "num_timepoints", .. })
        ));
        assert!(matches!(
            build_calendar(vec![Timeseries::new("z", 24, -1.0, 365.0)], &cfg),
            Err(CalendarError::NonPositive { field: "hours_per_timepoint", .. })
        ));
        assert!(matches!(
            build_calendar(vec![Timeseries::new("z", 24, 1.0, 300.0)], &cfg),
            Err(CalendarError::WeightSum { .. })
        ));
    }

    #[test]
    fn leap_year_target_is_configurable() {
        let cfg = CalendarConfig { annual_hours: 8784.0, ..Default::default() };
        let cal = build_calendar(vec![Timeseries::new("d", 24, 1.0, 366.0)], &cfg).unwrap();
        assert_eq!(cal.total_weight(), 8784.0);
    }

    #[test]
    fn cyclic_predecessors() {
        let cal = build_calendar(
            vec![Timeseries::new("a", 3, 1.0, 1460.0), Timeseries::new("b", 3, 1.0, 1460.0)],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(cal.prev_in_series(3), 5);
        assert_eq!(cal.prev_in_series(4), 3);
        assert_eq!(cal.prev_in_year(3), 2);
        assert_eq!(cal.prev_in_year(0), 5);
    }

    proptest! {
        #[test]
        fn weights_cover_the_year_and_partition(
            shape in prop::collection::vec((1usize..50, 1u8..5), 1..8)
        ) {
            let hours: f64 = shape.iter().map(|&(n, h)| n as f64 * h as f64).sum();
            let scale = 8760.0 / hours;
            let defs: Vec<_> = shape
                .iter()
                .enumerate()
                .map(|(k, &(n, h))| Timeseries::new(format!("s{k}"), n, h as f64, scale))
                .collect();
            let cal = build_calendar(defs, &CalendarConfig::default()).unwrap();
            prop_assert!((cal.total_weight() - 8760.0).abs() <= 1e-6 * 8760.0);
            prop_assert!(cal.weights().iter().all(|&w| w > 0.0));
            let mut next = 0;
            for s in 0..cal.timeseries().len() {
                let r = cal.series_range(s);
                prop_assert_eq!(r.start, next);
                for (k, t) in r.clone().enumerate() {
                    prop_assert_eq!(cal.timepoints()[t].index_in_series, k);
                    prop_assert_eq!(cal.timepoints()[t].series, s);
                }
                next = r.end;
            }
            prop_assert_eq!(next, cal.len());
        }
    }
}
