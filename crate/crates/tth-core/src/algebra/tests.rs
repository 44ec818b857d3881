use std::sync::Arc;

use chrono::NaiveDate;

use crate::corpus::DocId;
use crate::error::TthError;
use crate::grid::TimeGrid;
use crate::tth::{BuildFilter, Binning, RowKey, Tth, TthRow};
use crate::vocab::{TermId, Vocabulary};

use super::*;

fn d(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn day_grid() -> TimeGrid {
    TimeGrid::new(d("2017-01-01"), 1).unwrap()
}

fn abc_vocab() -> Arc<Vocabulary> {
    let mut v = Vocabulary::new();
    for t in ["a", "b", "c"] {
        v.intern(t);
    }
    Arc::new(v)
}

fn row(term: u32, interval: i64, count: u64, docs: &[u64]) -> TthRow {
    TthRow {
        term: TermId(term),
        interval,
        count,
        docs: docs.iter().map(|&d| DocId(d)).collect(),
        aux: Vec::new(),
    }
}

fn tth_from(vocab: &Arc<Vocabulary>, rows: Vec<TthRow>) -> Tth {
    Tth::from_rows(day_grid(), "text", Vec::new(), Arc::clone(vocab), None, rows).unwrap()
}

/// Left input of the two-histogram merge example.
fn merge_left(vocab: &Arc<Vocabulary>) -> Tth {
    tth_from(
        vocab,
        vec![
            row(0, 1, 2, &[1, 2]),
            row(0, 2, 3, &[1, 3]),
            row(1, 1, 4, &[2, 3, 4]),
            row(1, 2, 1, &[4]),
        ],
    )
}

/// Right input of the two-histogram merge example.
fn merge_right(vocab: &Arc<Vocabulary>) -> Tth {
    tth_from(
        vocab,
        vec![
            row(0, 1, 3, &[5, 6]),
            row(1, 1, 2, &[5]),
            row(1, 2, 1, &[6]),
            row(2, 2, 1, &[5]),
        ],
    )
}

fn flat(tth: &Tth) -> Vec<(u32, i64, u64, Vec<u64>)> {
    tth.rows()
        .map(|r| (r.term.0, r.interval, r.count, r.docs.iter().map(|d| d.0).collect()))
        .collect()
}

#[test]
fn merge_golden_two_histograms() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    assert_eq!(
        flat(&merged),
        vec![
            (0, 1, 5, vec![1, 2, 5, 6]),
            (0, 2, 3, vec![1, 3]),
            (1, 1, 6, vec![2, 3, 4, 5]),
            (1, 2, 2, vec![4, 6]),
            (2, 2, 1, vec![5]),
        ]
    );
}

#[test]
fn merge_with_empty_is_identity() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    let empty = left.empty_like();
    assert_eq!(merge(&left, &empty).unwrap(), left);
    assert_eq!(merge(&empty, &left).unwrap(), left);
}

#[test]
fn merge_self_deduplicates_fully() {
    // Full-overlap merge needs the forward index; build from the corpus so
    // the dedup formula collapses X + X back to X.
    let (corpus, index) = crate::tth::tests::fig1();
    let x = crate::tth::build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();
    let merged = merge(&x, &x).unwrap();
    assert_eq!(merged, x);
}

#[test]
fn merge_overlap_without_forward_is_dependency_error() {
    let vocab = abc_vocab();
    let x = tth_from(&vocab, vec![row(0, 1, 2, &[1, 2])]);
    assert!(matches!(merge(&x, &x), Err(TthError::Dependency(_))));
}

#[test]
fn merge_grid_mismatch_is_alignment_error() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    let mut other = merge_right(&vocab);
    other.grid = TimeGrid::new(d("2017-01-02"), 1).unwrap();
    assert!(matches!(merge(&left, &other), Err(TthError::Alignment(_))));
}

#[test]
fn select_by_term() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    let out = select(&left, &Predicate::atom(Atom::TermEq("a".into()))).unwrap();
    assert_eq!(
        flat(&out),
        vec![(0, 1, 2, vec![1, 2]), (0, 2, 3, vec![1, 3])]
    );
}

#[test]
fn select_true_is_identity() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    assert_eq!(select(&left, &Predicate::True).unwrap(), left);
}

#[test]
fn select_by_count() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    let out = select(&left, &Predicate::atom(Atom::CountCmp(CmpOp::Gt, 3))).unwrap();
    assert_eq!(flat(&out), vec![(1, 1, 4, vec![2, 3, 4])]);
}

#[test]
fn select_unknown_aux_is_schema_error() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    let pred = Predicate::atom(Atom::AuxEq("city".into(), "NY".into()));
    assert!(matches!(select(&left, &pred), Err(TthError::Schema(_))));
}

#[test]
fn project_ts_distinct() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    let out = project(&left, &[Attr::Ts], true).unwrap();
    assert_eq!(out.rows, vec![vec![AttrValue::Ts(1)], vec![AttrValue::Ts(2)]]);
}

#[test]
fn project_on_empty_tth() {
    let vocab = abc_vocab();
    let empty = merge_left(&vocab).empty_like();
    let out = project(&empty, &[Attr::Term, Attr::Count], false).unwrap();
    assert!(out.rows.is_empty());
}

#[test]
fn project_term_distinct_on_merged() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    let out = project(&merged, &[Attr::Term], true).unwrap();
    assert_eq!(
        out.rows,
        vec![
            vec![AttrValue::Term("a".into())],
            vec![AttrValue::Term("b".into())],
            vec![AttrValue::Term("c".into())],
        ]
    );
}

#[test]
fn project_unknown_attribute_is_schema_error() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    assert!(matches!(
        project(&left, &[Attr::Aux("city".into())], false),
        Err(TthError::Schema(_))
    ));
}

#[test]
fn coarsen_sums_counts_and_unions_docs() {
    let vocab = abc_vocab();
    let x = tth_from(&vocab, vec![row(0, 0, 2, &[1]), row(0, 1, 3, &[2])]);
    let out = coarsen(&x, 2, None, None).unwrap();
    assert_eq!(flat(&out), vec![(0, 0, 5, vec![1, 2])]);
    assert_eq!(out.grid().width_days(), 2);
}

#[test]
fn coarsen_same_width_is_identity() {
    let vocab = abc_vocab();
    let left = merge_left(&vocab);
    assert_eq!(coarsen(&left, 1, None, None).unwrap(), left);
}

#[test]
fn coarsen_non_multiple_is_alignment_error() {
    let vocab = abc_vocab();
    let x = coarsen(&merge_left(&vocab), 2, None, None).unwrap();
    assert!(matches!(
        coarsen(&x, 3, None, None),
        Err(TthError::Alignment(_))
    ));
}

#[test]
fn coarsen_window_restricts_output() {
    let vocab = abc_vocab();
    let x = tth_from(
        &vocab,
        vec![row(0, 0, 1, &[1]), row(0, 2, 2, &[2]), row(0, 4, 4, &[3])],
    );
    let out = coarsen(&x, 2, Some(d("2017-01-03")), Some(d("2017-01-05"))).unwrap();
    assert_eq!(flat(&out), vec![(0, 1, 2, vec![2])]);
}

#[test]
fn coarsen_misaligned_window_is_alignment_error() {
    let vocab = abc_vocab();
    let x = merge_left(&vocab);
    let err = coarsen(&x, 2, Some(d("2017-01-02")), None).unwrap_err();
    assert!(matches!(err, TthError::Alignment(_)));
}

#[test]
fn group_produces_one_part_per_value() {
    let mut v = Vocabulary::new();
    v.intern("a");
    let vocab = Arc::new(v);
    let mk = |interval: i64, city: &str, doc: u64| TthRow {
        term: TermId(0),
        interval,
        count: 1,
        docs: vec![DocId(doc)],
        aux: vec![city.to_string()],
    };
    let tth = Tth::from_rows(
        day_grid(),
        "text",
        vec!["city".into()],
        Arc::clone(&vocab),
        None,
        vec![mk(0, "NY", 1), mk(0, "LA", 2), mk(1, "SFO", 3), mk(1, "NY", 4)],
    )
    .unwrap();

    let parts = group(&tth, &["city".into()]).unwrap();
    let keys: Vec<Vec<String>> = parts.parts.keys().cloned().collect();
    assert_eq!(
        keys,
        vec![vec!["LA".to_string()], vec!["NY".to_string()], vec!["SFO".to_string()]]
    );
    assert_eq!(parts.parts[&vec!["NY".to_string()]].len(), 2);

    // Partition then merge restores the original, aux retained.
    let back = parts.merge_all().unwrap().unwrap();
    assert_eq!(back, tth);

    // Empty grouping list keeps everything in one part.
    let single = group(&tth, &[]).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single.parts[&Vec::new()], tth);

    assert!(matches!(
        group(&tth, &["nope".into()]),
        Err(TthError::Schema(_))
    ));
}

#[test]
fn apply_builtin_examples() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    let reg = FunctionRegistry::builtin();

    assert_eq!(apply(&merged, &reg, "max", &[]).unwrap(), vec![6.0]);
    assert_eq!(
        apply(&merged.empty_like(), &reg, "sum", &[]).unwrap(),
        vec![0.0]
    );
    // Mean count over the five stored rows: (5 + 3 + 6 + 2 + 1) / 5.
    assert_eq!(
        apply(&merged, &reg, "findMoments", &[1.0]).unwrap(),
        vec![3.4]
    );
    assert_eq!(apply(&merged, &reg, "mean", &[]).unwrap(), vec![3.4]);

    assert!(matches!(
        apply(&merged, &reg, "median", &[]),
        Err(TthError::Registry(_))
    ));
}

#[test]
fn find_modes_reports_most_frequent_counts() {
    let vocab = abc_vocab();
    // Counts: 2 appears twice, 5 appears twice, 7 once.
    let x = tth_from(
        &vocab,
        vec![
            row(0, 0, 2, &[1]),
            row(0, 1, 5, &[2]),
            row(1, 0, 5, &[3]),
            row(1, 1, 2, &[4]),
            row(2, 0, 7, &[5]),
        ],
    );
    let reg = FunctionRegistry::builtin();
    let modes = apply_arg(&x, &reg, "findModes", &[]).unwrap();
    assert_eq!(
        modes.iter().map(|m| m.value).collect::<Vec<_>>(),
        vec![2.0, 5.0]
    );
    assert!(modes.iter().all(|m| m.rows.len() == 2));
    assert!(apply(&x.empty_like(), &reg, "findModes", &[]).unwrap().is_empty());
}

#[test]
fn apply_arg_argmax() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    let reg = FunctionRegistry::builtin();
    let values = apply_arg(&merged, &reg, "max", &[]).unwrap();
    assert_eq!(values.len(), 1);
    assert_eq!(values[0].value, 6.0);
    assert_eq!(values[0].rows, vec![RowKey::new(TermId(1), 1, Vec::new())]);
}

#[test]
fn apply_arg_constant_tth_returns_all_rows() {
    let vocab = abc_vocab();
    let x = tth_from(&vocab, vec![row(0, 1, 2, &[1]), row(1, 2, 2, &[2])]);
    let reg = FunctionRegistry::builtin();
    let values = apply_arg(&x, &reg, "max", &[]).unwrap();
    assert_eq!(values[0].rows.len(), 2);
}

#[test]
fn sort_by_count_descending() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    let sorted = sort_by_axis(&merged, SortAxis::Count, true);
    assert_eq!(sorted[0].count, 6);
    assert_eq!(sorted[0].term, TermId(1));

    let top2 = top(sorted, 2);
    let counts: Vec<u64> = top2.iter().map(|r| r.count).collect();
    assert_eq!(counts, vec![6, 5]);
}

#[test]
fn sort_single_row_is_itself() {
    let vocab = abc_vocab();
    let x = tth_from(&vocab, vec![row(0, 1, 2, &[1])]);
    let sorted = sort_by_axis(&x, SortAxis::Term, false);
    assert_eq!(sorted.len(), 1);
    assert_eq!(sorted[0].count, 2);
}

#[test]
fn collapse_over_term_axis_fig1() {
    let (corpus, index) = crate::tth::tests::fig1();
    let tth = crate::tth::build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();
    let marginal = collapse(&tth, Axis::Term);
    assert_eq!(marginal.axis, Axis::Ts);
    let rows: Vec<(i64, u64, Vec<u64>)> = marginal
        .rows
        .iter()
        .map(|r| match r.key {
            MarginalKey::Ts(i) => (i, r.count, r.docs.iter().map(|d| d.0).collect()),
            _ => panic!("expected ts keys"),
        })
        .collect();
    assert_eq!(rows, vec![(1, 8, vec![1, 2]), (2, 4, vec![3])]);
    assert_eq!(marginal.total_count(), tth.total_count());
}

#[test]
fn collapse_empty_tth() {
    let vocab = abc_vocab();
    let empty = merge_left(&vocab).empty_like();
    assert!(collapse(&empty, Axis::Ts).rows.is_empty());
}

#[test]
fn collapse_over_ts_axis_on_merged() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    let marginal = collapse(&merged, Axis::Ts);
    let c = marginal
        .rows
        .iter()
        .find(|r| r.key == MarginalKey::Term(TermId(2)))
        .unwrap();
    assert_eq!(c.count, 1);
    assert_eq!(c.docs, vec![DocId(5)]);
}

#[test]
fn extract_axis_values() {
    let vocab = abc_vocab();
    let merged = merge(&merge_left(&vocab), &merge_right(&vocab)).unwrap();
    assert_eq!(
        extract_axis(&merged, Axis::Ts),
        vec![MarginalKey::Ts(1), MarginalKey::Ts(2)]
    );
    assert_eq!(
        extract_axis(&merged, Axis::Term),
        vec![
            MarginalKey::Term(TermId(0)),
            MarginalKey::Term(TermId(1)),
            MarginalKey::Term(TermId(2)),
        ]
    );
    assert!(extract_axis(&merged.empty_like(), Axis::Ts).is_empty());
}

#[test]
fn index_op_set_operations() {
    let ids = |v: &[u64]| v.iter().map(|&d| DocId(d)).collect::<Vec<_>>();
    assert_eq!(
        index_op(SetOp::Intersect, &ids(&[1, 2]), &ids(&[2, 3])).unwrap(),
        ids(&[2])
    );
    // The doc lists of the two A rows at interval 1 union to the merged list.
    assert_eq!(
        index_op(SetOp::Union, &ids(&[1, 2]), &ids(&[5, 6])).unwrap(),
        ids(&[1, 2, 5, 6])
    );
    assert_eq!(
        index_op(SetOp::Difference, &ids(&[1, 2, 5]), &ids(&[1, 2, 5])).unwrap(),
        ids(&[])
    );
    assert!(matches!(
        index_op(SetOp::Union, &ids(&[2, 1]), &ids(&[])),
        Err(TthError::Contract(_))
    ));
}

#[test]
fn query_index_fig1() {
    let (corpus, index) = crate::tth::tests::fig1();
    let tth = crate::tth::build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();
    let name = |t: &str| tth.vocab().lookup(t).unwrap();

    let hits = query_index(&tth, &[DocId(1)], None, None).unwrap();
    let expect: std::collections::BTreeSet<(TermId, i64)> =
        [(name("a"), 1), (name("b"), 1), (name("c"), 1)].into();
    assert_eq!(hits, expect);

    assert!(query_index(&tth, &[], None, None).unwrap().is_empty());

    let hits = query_index(
        &tth,
        &[DocId(3)],
        Some(d("2017-01-03")),
        Some(d("2017-01-04")),
    )
    .unwrap();
    let expect: std::collections::BTreeSet<(TermId, i64)> = [
        (name("a"), 2),
        (name("b"), 2),
        (name("d"), 2),
        (name("e"), 2),
    ]
    .into();
    assert_eq!(hits, expect);

    assert!(matches!(
        query_index(&tth, &[DocId(1)], Some(d("2017-01-05")), Some(d("2017-01-02"))),
        Err(TthError::Range(_))
    ));
}

#[test]
fn distance_examples() {
    let vocab = abc_vocab();
    let reg = DistanceRegistry::builtin();
    let x = merge_left(&vocab);
    assert_eq!(distance(&x, &x, &reg, "euclidean").unwrap(), 0.0);

    // Two differing cells: |1-4| = 3 and |2-6| = 4, so the distance is 5.
    let p = tth_from(&vocab, vec![row(0, 0, 1, &[1]), row(1, 0, 2, &[1])]);
    let q = tth_from(&vocab, vec![row(0, 0, 4, &[1]), row(1, 0, 6, &[1])]);
    assert_eq!(distance(&p, &q, &reg, "euclidean").unwrap(), 5.0);

    let kl = distance(&x, &x, &reg, "kl").unwrap();
    assert!(kl.abs() < 1e-12, "kl self-distance was {kl}");

    assert!(matches!(
        distance(&x.empty_like(), &x, &reg, "kl"),
        Err(TthError::UndefinedDistribution(_))
    ));

    let mut other_grid = merge_left(&vocab);
    other_grid.grid = TimeGrid::new(d("2018-01-01"), 1).unwrap();
    assert!(matches!(
        distance(&x, &other_grid, &reg, "euclidean"),
        Err(TthError::Alignment(_))
    ));
}

#[test]
fn ranged_rebinning_and_merge() {
    // Monthly bins over a quarter, then re-binned to the quarter.
    let mut v = Vocabulary::new();
    v.intern("x");
    let vocab = Arc::new(v);
    let rows: Vec<TthRow> = (0..90)
        .step_by(10)
        .map(|i| row(0, i as i64, 1, &[i as u64 + 1]))
        .collect();
    let daily = Tth::from_rows(day_grid(), "text", Vec::new(), vocab, None, rows).unwrap();

    let months = vec![d("2017-01-01"), d("2017-02-01"), d("2017-03-01"), d("2017-04-01")];
    let monthly = coarsen_to_ranges(&daily, &months).unwrap();
    assert_eq!(monthly.len(), 3);
    assert!(matches!(monthly.bins(), Binning::Ranges(r) if r.len() == 3));
    assert_eq!(monthly.total_count(), daily.total_count());

    // Uniform coarsening no longer applies to a ranged histogram.
    assert!(matches!(
        coarsen(&monthly, 30, None, None),
        Err(TthError::Alignment(_))
    ));

    let quarter = vec![d("2017-01-01"), d("2017-04-01")];
    let quarterly = coarsen_to_ranges(&monthly, &quarter).unwrap();
    assert_eq!(quarterly.len(), 1);
    assert_eq!(quarterly.total_count(), daily.total_count());

    // Misaligned quarter boundaries partially overlap the months.
    let bad = vec![d("2017-01-01"), d("2017-02-15")];
    assert!(matches!(
        coarsen_to_ranges(&monthly, &bad),
        Err(TthError::Alignment(_))
    ));

    // Merging two identically ranged histograms works key-wise.
    let merged = merge(&monthly, &monthly.empty_like()).unwrap();
    assert_eq!(merged, monthly);
}
