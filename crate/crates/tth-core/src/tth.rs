//! The temporal term histogram: sparse rows of (term, interval, auxiliary
//! values) carrying an occurrence count and the contributing document ids.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::NaiveDate;

use crate::corpus::{Corpus, DocId};
use crate::error::{Result, TthError};
use crate::grid::{Interval, TimeGrid};
use crate::index::{FieldIndex, TermDocFrequency};
use crate::vocab::{TermId, Vocabulary};

/// Rows keyed by term string: the vocabulary-independent view of a
/// histogram's content.
pub type TermStringRows = BTreeMap<(String, Interval, Vec<String>), (u64, Vec<DocId>)>;

/// Unique key of a stored histogram row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowKey {
    pub term: TermId,
    pub interval: Interval,
    /// Auxiliary values in the histogram's aux-schema order; empty for the
    /// minimal (no-category) histogram.
    pub aux: Vec<String>,
}

impl RowKey {
    pub fn new(term: TermId, interval: Interval, aux: Vec<String>) -> Self {
        RowKey { term, interval, aux }
    }
}

/// Payload of a stored row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowData {
    /// Total term occurrences over the contributing documents.
    pub count: u64,
    /// Sorted, duplicate-free contributing document ids.
    pub docs: Vec<DocId>,
}

/// A flattened row, as returned by row-level accessors and views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TthRow {
    pub term: TermId,
    pub interval: Interval,
    pub count: u64,
    pub docs: Vec<DocId>,
    pub aux: Vec<String>,
}

impl TthRow {
    pub fn key(&self) -> RowKey {
        RowKey::new(self.term, self.interval, self.aux.clone())
    }
}

/// Time-axis layout of a histogram.
///
/// `Uniform` bins are the plain grid intervals. `Ranges` bins arise from
/// re-binning onto an explicit date-boundary list (calendar months,
/// quarters); each range is identified by the grid interval of its start
/// date, and ranges are sorted and non-overlapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binning {
    Uniform,
    Ranges(Vec<(NaiveDate, NaiveDate)>),
}

/// The temporal term histogram.
///
/// Rows are stored sparse (no zero counts) and keyed uniquely by
/// (term, interval, aux). Values are immutable: every operator returns a new
/// histogram, so concurrent read-only sharing is safe.
#[derive(Debug, Clone)]
pub struct Tth {
    pub(crate) grid: TimeGrid,
    pub(crate) bins: Binning,
    pub(crate) field: String,
    pub(crate) aux_schema: Vec<String>,
    pub(crate) rows: BTreeMap<RowKey, RowData>,
    pub(crate) vocab: Arc<Vocabulary>,
    pub(crate) forward: Option<Arc<TermDocFrequency>>,
}

impl PartialEq for Tth {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.vocab, &other.vocab) || self.vocab == other.vocab)
            && self.grid == other.grid
            && self.bins == other.bins
            && self.field == other.field
            && self.aux_schema == other.aux_schema
            && self.rows == other.rows
    }
}

impl Tth {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn bins(&self) -> &Binning {
        &self.bins
    }

    pub fn field(&self) -> &str {
        &self.field
    }

    pub fn aux_schema(&self) -> &[String] {
        &self.aux_schema
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn forward(&self) -> Option<&Arc<TermDocFrequency>> {
        self.forward.as_ref()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Stored rows in (term, interval, aux) order.
    pub fn iter(&self) -> impl Iterator<Item = (&RowKey, &RowData)> {
        self.rows.iter()
    }

    /// Payload of the stored row with this key, if any.
    pub fn get_row(&self, key: &RowKey) -> Option<&RowData> {
        self.rows.get(key)
    }

    /// Stored rows as flattened values.
    pub fn rows(&self) -> impl Iterator<Item = TthRow> + '_ {
        self.rows.iter().map(|(k, v)| TthRow {
            term: k.term,
            interval: k.interval,
            count: v.count,
            docs: v.docs.clone(),
            aux: k.aux.clone(),
        })
    }

    pub fn total_count(&self) -> u64 {
        self.rows.values().map(|v| v.count).sum()
    }

    /// Union of all contributing document ids.
    pub fn doc_union(&self) -> Vec<DocId> {
        let set: BTreeSet<DocId> = self
            .rows
            .values()
            .flat_map(|v| v.docs.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Distinct aux value combinations present in the rows. For an empty aux
    /// schema this is always the single empty tuple.
    pub fn aux_combos(&self) -> Vec<Vec<String>> {
        if self.aux_schema.is_empty() {
            return vec![Vec::new()];
        }
        let set: BTreeSet<Vec<String>> = self.rows.keys().map(|k| k.aux.clone()).collect();
        set.into_iter().collect()
    }

    /// Smallest and largest interval present, if any rows are stored.
    pub fn interval_span(&self) -> Option<(Interval, Interval)> {
        let mut lo = None;
        let mut hi = None;
        for k in self.rows.keys() {
            lo = Some(lo.map_or(k.interval, |v: Interval| v.min(k.interval)));
            hi = Some(hi.map_or(k.interval, |v: Interval| v.max(k.interval)));
        }
        Some((lo?, hi?))
    }

    /// Start date of a row interval (the range start for ranged binning).
    pub fn interval_start(&self, interval: Interval) -> NaiveDate {
        self.grid.interval_start(interval)
    }

    /// Rows keyed by term string instead of term id. Vocabulary-independent
    /// view used for comparisons across separately loaded histograms.
    pub fn rows_by_term_string(&self) -> TermStringRows {
        self.rows
            .iter()
            .map(|(k, v)| {
                let term = self
                    .vocab
                    .term(k.term)
                    .unwrap_or("<unknown>")
                    .to_string();
                ((term, k.interval, k.aux.clone()), (v.count, v.docs.clone()))
            })
            .collect()
    }

    /// An empty histogram with the same grid, binning, schema, and shared
    /// references.
    pub fn empty_like(&self) -> Tth {
        Tth {
            grid: self.grid,
            bins: self.bins.clone(),
            field: self.field.clone(),
            aux_schema: self.aux_schema.clone(),
            rows: BTreeMap::new(),
            vocab: Arc::clone(&self.vocab),
            forward: self.forward.clone(),
        }
    }

    pub(crate) fn with_rows(&self, rows: BTreeMap<RowKey, RowData>) -> Tth {
        let mut t = self.empty_like();
        t.rows = rows;
        t
    }

    /// Construct a histogram from explicit rows, validating the sparse-row
    /// invariants: counts >= |docs| >= 1, docs sorted and duplicate-free,
    /// aux arity matching the schema, term ids within the vocabulary.
    pub fn from_rows<I>(
        grid: TimeGrid,
        field: &str,
        aux_schema: Vec<String>,
        vocab: Arc<Vocabulary>,
        forward: Option<Arc<TermDocFrequency>>,
        rows: I,
    ) -> Result<Tth>
    where
        I: IntoIterator<Item = TthRow>,
    {
        let mut map = BTreeMap::new();
        for row in rows {
            if !vocab.contains_id(row.term) {
                return Err(TthError::Lookup(format!(
                    "row term id {} is outside the vocabulary",
                    row.term
                )));
            }
            if row.aux.len() != aux_schema.len() {
                return Err(TthError::Schema(format!(
                    "row aux arity {} does not match schema arity {}",
                    row.aux.len(),
                    aux_schema.len()
                )));
            }
            if row.docs.is_empty() || row.count < row.docs.len() as u64 {
                return Err(TthError::Contract(format!(
                    "stored rows require count >= |docs| >= 1, got count {} with {} docs",
                    row.count,
                    row.docs.len()
                )));
            }
            if row.docs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TthError::Contract(
                    "row doc ids must be sorted and duplicate-free".into(),
                ));
            }
            let key = row.key();
            if map
                .insert(
                    key,
                    RowData {
                        count: row.count,
                        docs: row.docs,
                    },
                )
                .is_some()
            {
                return Err(TthError::Conflict(
                    "duplicate (term, interval, aux) row key".into(),
                ));
            }
        }
        Ok(Tth {
            grid,
            bins: Binning::Uniform,
            field: field.to_string(),
            aux_schema,
            rows: map,
            vocab,
            forward,
        })
    }

    /// Dense view over `terms` x an inclusive interval range: stored rows
    /// pass through, gaps are filled with count 0 and an empty doc list.
    /// One block per aux combination present in the histogram.
    pub fn dense_view(&self, terms: &[TermId], lo: Interval, hi: Interval) -> Result<Vec<TthRow>> {
        for &t in terms {
            if !self.vocab.contains_id(t) {
                return Err(TthError::Lookup(format!(
                    "term id {t} is outside the vocabulary"
                )));
            }
        }
        let mut terms: Vec<TermId> = terms.to_vec();
        terms.sort_unstable();
        terms.dedup();
        let intervals = self.intervals_between(lo, hi);
        let mut out = Vec::new();
        for aux in self.aux_combos() {
            for &term in &terms {
                for &interval in &intervals {
                    let key = RowKey::new(term, interval, aux.clone());
                    match self.rows.get(&key) {
                        Some(data) => out.push(TthRow {
                            term,
                            interval,
                            count: data.count,
                            docs: data.docs.clone(),
                            aux: aux.clone(),
                        }),
                        None => out.push(TthRow {
                            term,
                            interval,
                            count: 0,
                            docs: Vec::new(),
                            aux: aux.clone(),
                        }),
                    }
                }
            }
        }
        Ok(out)
    }

    /// Interval indices between `lo` and `hi` inclusive, respecting ranged
    /// binning (only range-start intervals exist there).
    pub(crate) fn intervals_between(&self, lo: Interval, hi: Interval) -> Vec<Interval> {
        match &self.bins {
            Binning::Uniform => (lo..=hi).collect(),
            Binning::Ranges(ranges) => ranges
                .iter()
                .filter_map(|(start, _)| self.grid.interval_of(*start).ok())
                .filter(|i| (lo..=hi).contains(i))
                .collect(),
        }
    }

    /// Fetch stored rows by key, in key order. All requested keys must be
    /// present; missing keys are reported together.
    pub fn get_records(&self, keys: &[RowKey]) -> Result<Vec<TthRow>> {
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(keys.len());
        for key in keys {
            match self.rows.get(key) {
                Some(data) => out.push(TthRow {
                    term: key.term,
                    interval: key.interval,
                    count: data.count,
                    docs: data.docs.clone(),
                    aux: key.aux.clone(),
                }),
                None => missing.push(self.describe_key(key)),
            }
        }
        if !missing.is_empty() {
            return Err(TthError::AbsentRows(format!(
                "no stored rows for keys: {}",
                missing.join(", ")
            )));
        }
        Ok(out)
    }

    pub(crate) fn describe_key(&self, key: &RowKey) -> String {
        let term = self.vocab.term(key.term).unwrap_or("<unknown>");
        if key.aux.is_empty() {
            format!("({term}, {})", key.interval)
        } else {
            format!("({term}, {}, [{}])", key.interval, key.aux.join(", "))
        }
    }
}

/// Predicate constraining which documents contribute to a build: a date
/// window, auxiliary equalities, and per-document term-count thresholds.
#[derive(Debug, Clone, Default)]
pub struct BuildFilter {
    /// Inclusive start date.
    pub date_start: Option<NaiveDate>,
    /// Exclusive end date.
    pub date_end: Option<NaiveDate>,
    /// Required (category, value) equalities.
    pub aux_equals: Vec<(String, String)>,
    /// The document must contain each term at least this many times. A term
    /// absent from the vocabulary matches no document.
    pub min_term_count: Vec<(String, u64)>,
}

impl BuildFilter {
    pub fn is_empty(&self) -> bool {
        self.date_start.is_none()
            && self.date_end.is_none()
            && self.aux_equals.is_empty()
            && self.min_term_count.is_empty()
    }
}

/// Build a histogram from corpus indexes: aggregate the forward counts of
/// every document passing `filter`, grouped by (term, interval, aux values).
pub fn build_tth(
    corpus: &Corpus,
    index: &FieldIndex,
    width_days: i64,
    filter: &BuildFilter,
    aux_schema: &[String],
) -> Result<Tth> {
    let grid = corpus.grid.coarser(width_days)?;
    for name in aux_schema {
        if !corpus.config.categories.iter().any(|c| c == name) {
            return Err(TthError::Schema(format!(
                "'{name}' is not a declared category attribute"
            )));
        }
    }
    for (name, _) in &filter.aux_equals {
        if !corpus.config.categories.iter().any(|c| c == name) {
            return Err(TthError::Schema(format!(
                "filter references unknown category '{name}'"
            )));
        }
    }
    let thresholds: Vec<(Option<TermId>, u64)> = filter
        .min_term_count
        .iter()
        .map(|(term, n)| (index.vocab.lookup(term), *n))
        .collect();

    let mut rows: BTreeMap<RowKey, (u64, Vec<DocId>)> = BTreeMap::new();
    for (doc, hist) in corpus.docs.iter().zip(&index.doc_hists) {
        debug_assert_eq!(doc.id, hist.doc_id);
        if let Some(start) = filter.date_start {
            if doc.date < start {
                continue;
            }
        }
        if let Some(end) = filter.date_end {
            if doc.date >= end {
                continue;
            }
        }
        if filter
            .aux_equals
            .iter()
            .any(|(name, value)| doc.aux.get(name) != Some(value))
        {
            continue;
        }
        let meets_thresholds = thresholds.iter().all(|(term, n)| match term {
            Some(t) => index.forward.count(*t, doc.id) >= *n,
            None => false,
        });
        if !meets_thresholds {
            continue;
        }

        let interval = grid.interval_of(doc.date)?;
        let aux: Vec<String> = aux_schema
            .iter()
            .map(|name| doc.aux.get(name).cloned().unwrap_or_default())
            .collect();
        for &(term, count) in &hist.rows {
            let entry = rows
                .entry(RowKey::new(term, interval, aux.clone()))
                .or_insert((0, Vec::new()));
            entry.0 += count;
            entry.1.push(doc.id);
        }
    }

    let rows = rows
        .into_iter()
        .map(|(k, (count, mut docs))| {
            docs.sort_unstable();
            docs.dedup();
            (k, RowData { count, docs })
        })
        .collect();

    Ok(Tth {
        grid,
        bins: Binning::Uniform,
        field: index.field.clone(),
        aux_schema: aux_schema.to_vec(),
        rows,
        vocab: Arc::clone(&index.vocab),
        forward: Some(Arc::clone(&index.forward)),
    })
}
