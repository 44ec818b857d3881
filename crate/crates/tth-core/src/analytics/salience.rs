//! Salience detection: find the week where a term set ranks best and test
//! its rank vector against every other qualifying week.

use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::Tth;
use crate::vocab::TermId;

use super::mwu::{mann_whitney_u, Alternative, UTestResult};
use super::rank::rank_view;

#[derive(Debug, Clone, PartialEq)]
pub struct SalienceComparison {
    pub week: Interval,
    pub r_sum: u64,
    pub test: UTestResult,
    /// p <= alpha against this week.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalienceResult {
    /// Week with the smallest rank sum (smaller rank = more dominant); ties
    /// take the earliest week.
    pub best_week: Interval,
    pub best_r_sum: u64,
    pub comparisons: Vec<SalienceComparison>,
    /// The term set is salient when its best week separates from every other
    /// qualifying week at the given alpha.
    pub salient: bool,
}

/// Build the rank view at `week_days`, sum the ranks of `terms` per
/// qualifying week, pick the extremal (minimum rank-sum) week, and compare
/// its rank vector one-sidedly against each other week.
pub fn salience(
    tth: &Tth,
    terms: &[TermId],
    count_threshold: u64,
    alpha: f64,
    week_days: i64,
) -> Result<SalienceResult> {
    let view = rank_view(tth, week_days, count_threshold, terms)?;
    if view.intervals.len() < 2 {
        return Err(TthError::InsufficientData(format!(
            "need at least 2 qualifying weeks, found {}",
            view.intervals.len()
        )));
    }

    let rank_vector = |week: Interval| -> Vec<f64> {
        terms
            .iter()
            .map(|&t| view.rank_of(week, t).expect("terms qualify in kept weeks") as f64)
            .collect()
    };
    let r_sum = |week: Interval| -> u64 { rank_vector(week).iter().sum::<f64>() as u64 };

    let best_week = *view
        .intervals
        .keys()
        .min_by_key(|&&w| (r_sum(w), w))
        .unwrap();
    let best_ranks = rank_vector(best_week);
    let best_r_sum = r_sum(best_week);

    let mut comparisons = Vec::new();
    for (&week, _) in view.intervals.iter().filter(|(&w, _)| w != best_week) {
        let other_ranks = rank_vector(week);
        let test = mann_whitney_u(&best_ranks, &other_ranks, Alternative::Less)?;
        comparisons.push(SalienceComparison {
            week,
            r_sum: r_sum(week),
            significant: test.p_value <= alpha,
            test,
        });
    }
    let salient = comparisons.iter().all(|c| c.significant);
    Ok(SalienceResult {
        best_week,
        best_r_sum,
        comparisons,
        salient,
    })
}
