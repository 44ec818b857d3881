//! Per-interval TF-IDF ranking over a histogram.
//!
//! The score of a term within an interval is
//! `count x ln(N / df)` where `N` is the number of distinct documents
//! contributing to the interval and `df` the number containing the term. A
//! term present in every document of its interval scores exactly 0.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::Tth;
use crate::vocab::TermId;

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfEntry {
    /// 1-based rank within the interval, score descending, ties by term id.
    pub rank: usize,
    pub term: TermId,
    pub interval: Interval,
    pub score: f64,
}

/// Top-`k` terms per interval by TF-IDF score. Auxiliary axes are folded
/// together first; rows are returned interval-major.
pub fn tf_idf(tth: &Tth, k: usize) -> Result<Vec<TfIdfEntry>> {
    if k == 0 {
        return Err(TthError::Argument("top-k needs k >= 1".into()));
    }

    // Fold aux: per (interval, term) total count and doc set.
    let mut cells: BTreeMap<Interval, BTreeMap<TermId, (u64, BTreeSet<DocId>)>> = BTreeMap::new();
    for (key, data) in tth.iter() {
        let cell = cells
            .entry(key.interval)
            .or_default()
            .entry(key.term)
            .or_insert((0, BTreeSet::new()));
        cell.0 += data.count;
        cell.1.extend(data.docs.iter().copied());
    }

    let mut out = Vec::new();
    for (interval, terms) in cells {
        let mut interval_docs: BTreeSet<DocId> = BTreeSet::new();
        for (_, docs) in terms.values() {
            interval_docs.extend(docs.iter().copied());
        }
        let n = interval_docs.len() as f64;

        let mut scored: Vec<(TermId, f64)> = terms
            .into_iter()
            .map(|(term, (count, docs))| {
                let df = docs.len() as f64;
                let score = if df == n {
                    0.0
                } else {
                    count as f64 * (n / df).ln()
                };
                (term, score)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        for (i, (term, score)) in scored.into_iter().take(k).enumerate() {
            out.push(TfIdfEntry {
                rank: i + 1,
                term,
                interval,
                score,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use chrono::NaiveDate;

    use crate::grid::TimeGrid;
    use crate::tth::TthRow;
    use crate::vocab::Vocabulary;

    fn tth(rows: Vec<(u32, i64, u64, Vec<u64>)>) -> Tth {
        let mut vocab = Vocabulary::new();
        for t in ["p", "q", "r", "s"] {
            vocab.intern(t);
        }
        Tth::from_rows(
            TimeGrid::new(NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(), 1).unwrap(),
            "text",
            Vec::new(),
            Arc::new(vocab),
            None,
            rows.into_iter().map(|(t, i, c, docs)| TthRow {
                term: TermId(t),
                interval: i,
                count: c,
                docs: docs.into_iter().map(DocId).collect(),
                aux: Vec::new(),
            }),
        )
        .unwrap()
    }

    #[test]
    fn term_in_every_document_scores_zero() {
        // Interval 0 has docs {1, 2}; p appears in both.
        let t = tth(vec![
            (0, 0, 5, vec![1, 2]),
            (1, 0, 3, vec![1]),
        ]);
        let entries = tf_idf(&t, 10).unwrap();
        let p = entries.iter().find(|e| e.term == TermId(0)).unwrap();
        assert_eq!(p.score, 0.0);
        let q = entries.iter().find(|e| e.term == TermId(1)).unwrap();
        assert!(q.score > 0.0);
        assert_eq!(q.rank, 1);
    }

    #[test]
    fn score_matches_direct_formula() {
        // Interval with 4 docs; term q has count 6 over 2 of them:
        // 6 * ln(4/2) = 6 ln 2.
        let t = tth(vec![
            (0, 0, 1, vec![1]),
            (1, 0, 6, vec![2, 3]),
            (2, 0, 1, vec![4]),
        ]);
        let entries = tf_idf(&t, 10).unwrap();
        let q = entries.iter().find(|e| e.term == TermId(1)).unwrap();
        assert!((q.score - 4.158883).abs() < 1e-6, "score = {}", q.score);
    }

    #[test]
    fn k_larger_than_term_count_returns_all_ranked() {
        let t = tth(vec![
            (0, 0, 2, vec![1]),
            (1, 0, 4, vec![2]),
        ]);
        let entries = tf_idf(&t, 50).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(
            entries.iter().map(|e| e.rank).collect::<Vec<_>>(),
            vec![1, 2]
        );
    }

    #[test]
    fn score_increases_with_count_at_fixed_df() {
        // Same df (one doc each) but different counts: the heavier term
        // scores strictly higher and ranks first.
        let t = tth(vec![
            (0, 0, 9, vec![1]),
            (1, 0, 3, vec![2]),
            (2, 0, 1, vec![3]),
        ]);
        let entries = tf_idf(&t, 10).unwrap();
        let score = |t: u32| entries.iter().find(|e| e.term == TermId(t)).unwrap().score;
        assert!(score(0) > score(1));
        assert!(score(1) > score(2));
        assert_eq!(entries[0].term, TermId(0));
    }

    #[test]
    fn zero_k_is_argument_error() {
        let t = tth(vec![(0, 0, 2, vec![1])]);
        assert!(matches!(tf_idf(&t, 0), Err(TthError::Argument(_))));
    }
}
