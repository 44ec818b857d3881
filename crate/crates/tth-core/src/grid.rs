//! Discretized time: a uniform grid of day-width intervals anchored at an
//! origin date.

use chrono::{Duration, NaiveDate};

use crate::error::{Result, TthError};

/// Index of an interval on a [`TimeGrid`]. Interval `i` denotes the half-open
/// date range `[origin + i*width, origin + (i+1)*width)`.
pub type Interval = i64;

/// A uniform time grid: origin date plus a positive whole-day interval width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    origin: NaiveDate,
    width_days: i64,
}

impl TimeGrid {
    pub fn new(origin: NaiveDate, width_days: i64) -> Result<Self> {
        if width_days < 1 {
            return Err(TthError::Argument(format!(
                "grid width must be a positive whole number of days, got {width_days}"
            )));
        }
        Ok(TimeGrid { origin, width_days })
    }

    pub fn origin(&self) -> NaiveDate {
        self.origin
    }

    pub fn width_days(&self) -> i64 {
        self.width_days
    }

    /// Map a date onto its interval index. Dates before the origin are
    /// rejected: documents must fall on or after the grid origin.
    pub fn interval_of(&self, date: NaiveDate) -> Result<Interval> {
        let days = date.signed_duration_since(self.origin).num_days();
        if days < 0 {
            return Err(TthError::Range(format!(
                "date {date} precedes grid origin {}",
                self.origin
            )));
        }
        Ok(days / self.width_days)
    }

    /// Start date of interval `i`.
    pub fn interval_start(&self, i: Interval) -> NaiveDate {
        self.origin + Duration::days(i * self.width_days)
    }

    /// End date (exclusive) of interval `i`.
    pub fn interval_end(&self, i: Interval) -> NaiveDate {
        self.origin + Duration::days((i + 1) * self.width_days)
    }

    /// True when `date` falls exactly on an interval boundary of this grid.
    pub fn is_boundary(&self, date: NaiveDate) -> bool {
        let days = date.signed_duration_since(self.origin).num_days();
        days.rem_euclid(self.width_days) == 0
    }

    /// A grid with the same origin and `new_width` days. Valid only when the
    /// new width is a whole multiple of the current width.
    pub fn coarser(&self, new_width: i64) -> Result<TimeGrid> {
        if new_width < self.width_days || new_width % self.width_days != 0 {
            return Err(TthError::Alignment(format!(
                "new width {new_width} is not a multiple of current width {}",
                self.width_days
            )));
        }
        TimeGrid::new(self.origin, new_width)
    }

    /// Width ratio against a finer grid with the same origin.
    pub fn ratio_to(&self, finer: &TimeGrid) -> Result<i64> {
        if self.origin != finer.origin || self.width_days % finer.width_days != 0 {
            return Err(TthError::Alignment(format!(
                "grids ({}, {}d) and ({}, {}d) are not nested",
                self.origin, self.width_days, finer.origin, finer.width_days
            )));
        }
        Ok(self.width_days / finer.width_days)
    }
}

pub(crate) fn parse_iso_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| TthError::Parse(format!("invalid ISO-8601 date '{s}': {e}")))
}
