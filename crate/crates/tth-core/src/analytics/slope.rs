//! Maximum temporal slope of a count series.

use std::collections::BTreeMap;

use crate::error::{Result, TthError};
use crate::grid::Interval;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeResult {
    /// Count units per interval.
    pub max_slope: f64,
    /// The (from, to) interval edge where the maximum occurs; ties take the
    /// earliest edge.
    pub edge: (Interval, Interval),
}

/// Maximum forward difference over consecutive intervals. Gaps between the
/// first and last given interval are zero-filled before differencing, so a
/// sparse series does not skip intervals and inflate slopes.
pub fn find_max_slope(series: &[(Interval, u64)]) -> Result<SlopeResult> {
    if series.len() < 2 {
        return Err(TthError::Argument(
            "slope extraction needs at least two points".into(),
        ));
    }
    let counts: BTreeMap<Interval, u64> = series.iter().copied().collect();
    let lo = *counts.keys().next().unwrap();
    let hi = *counts.keys().next_back().unwrap();
    if lo == hi {
        return Err(TthError::Argument(
            "slope extraction needs at least two distinct intervals".into(),
        ));
    }

    let mut best: Option<SlopeResult> = None;
    for i in lo..hi {
        let c0 = counts.get(&i).copied().unwrap_or(0) as f64;
        let c1 = counts.get(&(i + 1)).copied().unwrap_or(0) as f64;
        let slope = c1 - c0;
        if best.as_ref().is_none_or(|b| slope > b.max_slope) {
            best = Some(SlopeResult {
                max_slope: slope,
                edge: (i, i + 1),
            });
        }
    }
    Ok(best.unwrap())
}
