//! Rank-based histogram view: per-interval term rankings by count, computed
//! on weekly (or otherwise coarsened) aggregates.

use std::collections::BTreeMap;

use crate::algebra;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::Tth;
use crate::vocab::TermId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankEntry {
    pub term: TermId,
    /// 1-based rank within the interval, count descending, ties by term id.
    pub rank: usize,
    pub count: u64,
}

/// Per-interval rankings of terms by count. Only intervals where every
/// requested term qualifies are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedTth {
    pub width_days: i64,
    pub intervals: BTreeMap<Interval, Vec<RankEntry>>,
}

impl RankedTth {
    pub fn rank_of(&self, interval: Interval, term: TermId) -> Option<usize> {
        self.intervals
            .get(&interval)?
            .iter()
            .find(|e| e.term == term)
            .map(|e| e.rank)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Coarsen to `width_days`, keep rows with count above `count_threshold`,
/// keep only intervals where every term of `terms` survives, then rank each
/// interval's remaining terms by descending count. Auxiliary values are
/// folded together before ranking.
pub fn rank_view(
    tth: &Tth,
    width_days: i64,
    count_threshold: u64,
    terms: &[TermId],
) -> Result<RankedTth> {
    if terms.is_empty() {
        return Err(TthError::Argument(
            "rank view needs a non-empty term set".into(),
        ));
    }
    for &t in terms {
        if !tth.vocab().contains_id(t) {
            return Err(TthError::Lookup(format!(
                "term id {t} is outside the vocabulary"
            )));
        }
    }
    let weekly = algebra::coarsen(tth, width_days, None, None)?;

    // Fold aux axes and apply the count threshold.
    let mut per_interval: BTreeMap<Interval, BTreeMap<TermId, u64>> = BTreeMap::new();
    for (key, data) in weekly.iter() {
        *per_interval
            .entry(key.interval)
            .or_default()
            .entry(key.term)
            .or_insert(0) += data.count;
    }
    for counts in per_interval.values_mut() {
        counts.retain(|_, c| *c > count_threshold);
    }

    let mut intervals = BTreeMap::new();
    for (interval, counts) in per_interval {
        if !terms.iter().all(|t| counts.contains_key(t)) {
            continue;
        }
        let mut entries: Vec<(TermId, u64)> = counts.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        intervals.insert(
            interval,
            entries
                .into_iter()
                .enumerate()
                .map(|(i, (term, count))| RankEntry {
                    term,
                    rank: i + 1,
                    count,
                })
                .collect(),
        );
    }
    Ok(RankedTth {
        width_days,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use chrono::NaiveDate;

    use crate::corpus::DocId;
    use crate::grid::TimeGrid;
    use crate::tth::TthRow;
    use crate::vocab::Vocabulary;

    fn tth_with_counts(rows: &[(u32, i64, u64)]) -> Tth {
        let mut vocab = Vocabulary::new();
        for t in ["x", "y", "z"] {
            vocab.intern(t);
        }
        let rows: Vec<TthRow> = rows
            .iter()
            .map(|&(t, i, c)| TthRow {
                term: TermId(t),
                interval: i,
                count: c,
                docs: vec![DocId(1)],
                aux: Vec::new(),
            })
            .collect();
        Tth::from_rows(
            TimeGrid::new(NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(), 7).unwrap(),
            "text",
            Vec::new(),
            Arc::new(vocab),
            None,
            rows,
        )
        .unwrap()
    }

    #[test]
    fn ranks_break_ties_by_term_id() {
        let tth = tth_with_counts(&[(0, 0, 9), (1, 0, 5), (2, 0, 5)]);
        let rv = rank_view(&tth, 7, 0, &[TermId(0)]).unwrap();
        let entries = &rv.intervals[&0];
        assert_eq!(
            entries.iter().map(|e| (e.term.0, e.rank)).collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3)]
        );
    }

    #[test]
    fn intervals_missing_a_term_are_dropped() {
        let tth = tth_with_counts(&[(0, 0, 9), (1, 0, 5), (0, 1, 2), (0, 2, 1), (1, 2, 1)]);
        let rv = rank_view(&tth, 7, 0, &[TermId(0), TermId(1)]).unwrap();
        assert_eq!(rv.intervals.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn no_interval_with_all_terms_gives_empty_view() {
        let tth = tth_with_counts(&[(0, 0, 9), (1, 1, 5)]);
        let rv = rank_view(&tth, 7, 0, &[TermId(0), TermId(1)]).unwrap();
        assert!(rv.is_empty());
    }

    #[test]
    fn threshold_applies_before_qualification() {
        let tth = tth_with_counts(&[(0, 0, 9), (1, 0, 1)]);
        let rv = rank_view(&tth, 7, 1, &[TermId(0), TermId(1)]).unwrap();
        assert!(rv.is_empty());
    }

    #[test]
    fn empty_term_set_is_argument_error() {
        let tth = tth_with_counts(&[(0, 0, 9)]);
        assert!(matches!(
            rank_view(&tth, 7, 0, &[]),
            Err(TthError::Argument(_))
        ));
    }
}
