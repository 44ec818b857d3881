//! Topic co-occurrence: find the intervals where an anchor term dominates,
//! then the other terms dominant in those intervals.

use std::collections::BTreeSet;

use crate::algebra::{self, Atom, Predicate, SortAxis};
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::Tth;

/// Co-occurrence result for one group (a single part with an empty key when
/// ungrouped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceGroup {
    pub key: Vec<String>,
    /// Intervals (on the coarsened grid) where the anchor ranks in the top k.
    pub intervals: Vec<Interval>,
    /// Up to k+1 leading distinct terms of those intervals, anchor removed.
    pub terms: Vec<String>,
}

/// Two-phase co-occurrence query: coarsen to `interval_days`, pick the top-k
/// anchor records and project their intervals, then collect the top-(k+1)
/// distinct terms over those intervals and drop the anchor. With `group_by`,
/// the whole pipeline runs per category value.
pub fn topic_cooccurrence(
    tth: &Tth,
    anchor: &str,
    interval_days: i64,
    k: usize,
    group_by: Option<&str>,
) -> Result<Vec<CooccurrenceGroup>> {
    if k == 0 {
        return Err(TthError::Argument("top-k needs k >= 1".into()));
    }
    tth.vocab().require(anchor)?;

    let coarse = algebra::coarsen(tth, interval_days, None, None)?;
    let parts: Vec<(Vec<String>, Tth)> = match group_by {
        None => vec![(Vec::new(), coarse)],
        Some(var) => algebra::group(&coarse, &[var.to_string()])?
            .parts
            .into_iter()
            .collect(),
    };

    let mut out = Vec::new();
    for (key, part) in parts {
        let anchored = algebra::select(&part, &Predicate::atom(Atom::TermEq(anchor.into())))?;
        let top_anchor = algebra::top(algebra::sort_by_axis(&anchored, SortAxis::Count, true), k);
        let intervals: BTreeSet<Interval> = top_anchor.iter().map(|r| r.interval).collect();
        if intervals.is_empty() {
            continue;
        }

        let in_window = algebra::select(
            &part,
            &Predicate::atom(Atom::TsIn(intervals.iter().copied().collect())),
        )?;
        let ranked = algebra::sort_by_axis(&in_window, SortAxis::Count, true);
        let mut terms = Vec::new();
        let mut seen = BTreeSet::new();
        for row in &ranked {
            if seen.insert(row.term) {
                terms.push(row.term);
                if terms.len() == k + 1 {
                    break;
                }
            }
        }
        let anchor_id = tth.vocab().lookup(anchor);
        let terms: Vec<String> = terms
            .into_iter()
            .filter(|t| Some(*t) != anchor_id)
            .map(|t| tth.vocab().term(t).unwrap_or("<unknown>").to_string())
            .collect();

        out.push(CooccurrenceGroup {
            key,
            intervals: intervals.into_iter().collect(),
            terms,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tth::{build_tth, BuildFilter};

    #[test]
    fn unknown_anchor_is_lookup_error() {
        let (corpus, index) = crate::tth::tests::fig1();
        let tth = build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();
        assert!(matches!(
            topic_cooccurrence(&tth, "zzz", 1, 3, None),
            Err(TthError::Lookup(_))
        ));
    }

    #[test]
    fn anchor_present_yields_cooccurring_terms() {
        let (corpus, index) = crate::tth::tests::fig1();
        let tth = build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();
        let groups = topic_cooccurrence(&tth, "b", 1, 1, None).unwrap();
        assert_eq!(groups.len(), 1);
        // b dominates interval 1 (count 2); the top-2 distinct terms there
        // are a (3) and b, so only a survives the anchor removal.
        assert_eq!(groups[0].intervals, vec![1]);
        assert_eq!(groups[0].terms, vec!["a".to_string()]);
    }

    #[test]
    fn zero_k_is_argument_error() {
        let (corpus, index) = crate::tth::tests::fig1();
        let tth = build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();
        assert!(matches!(
            topic_cooccurrence(&tth, "a", 1, 0, None),
            Err(TthError::Argument(_))
        ));
    }

    #[test]
    fn anchor_absent_from_all_intervals_gives_empty_result() {
        // 'e' occurs only in the doc at the second interval; a build filtered
        // to the first interval keeps it in the vocabulary but not the rows.
        let (corpus, index) = crate::tth::tests::fig1();
        let filter = BuildFilter {
            date_end: Some(chrono::NaiveDate::from_ymd_opt(2017, 1, 3).unwrap()),
            ..Default::default()
        };
        let tth = build_tth(&corpus, &index, 1, &filter, &[]).unwrap();
        assert!(tth.vocab().lookup("e").is_some());
        let groups = topic_cooccurrence(&tth, "e", 1, 3, None).unwrap();
        assert!(groups.is_empty());
    }

    #[test]
    fn grouping_by_a_single_valued_attribute_matches_ungrouped() {
        use crate::config::MappingConfig;
        use crate::corpus::{load_corpus, Record};
        use crate::index::build_indexes;

        let config = MappingConfig::from_toml_str(
            r#"
            corpus = "onecity"
            id_field = "id"
            temporal_field = "date"
            term_index = ["text"]
            categories = ["city"]
            grid_origin = "2017-01-01"
            "#,
            None,
        )
        .unwrap();
        let rec = |id: &str, date: &str, text: &str| {
            let mut r = Record::new();
            r.insert("id".into(), id.into());
            r.insert("date".into(), date.into());
            r.insert("city".into(), "NY".into());
            r.insert("text".into(), text.into());
            Ok(r)
        };
        let corpus = load_corpus(
            &config,
            vec![
                rec("1", "2017-01-02", "a b b"),
                rec("2", "2017-01-03", "b c"),
            ],
        )
        .unwrap();
        let index = build_indexes(&corpus, "text").unwrap();
        let tth =
            build_tth(&corpus, &index, 1, &BuildFilter::default(), &["city".into()]).unwrap();

        let grouped = topic_cooccurrence(&tth, "b", 1, 2, Some("city")).unwrap();
        let plain = topic_cooccurrence(&tth, "b", 1, 2, None).unwrap();
        assert_eq!(grouped.len(), 1);
        assert_eq!(grouped[0].key, vec!["NY".to_string()]);
        assert_eq!(grouped[0].intervals, plain[0].intervals);
        assert_eq!(grouped[0].terms, plain[0].terms);
    }
}
