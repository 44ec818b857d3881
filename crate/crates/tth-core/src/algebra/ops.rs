//! The operator set over temporal term histograms: relational extraction,
//! time-axis manipulation, grouping, index operations, and marginals.
//!
//! Every operator is a pure function: inputs are immutable and results are
//! new values, so independent evaluations may run concurrently.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::NaiveDate;

use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::{Binning, RowData, RowKey, Tth, TthRow};
use crate::vocab::TermId;

use super::predicate::Predicate;

/// Histogram axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Term,
    Ts,
}

/// Sortable axes for `sort_by_axis` (the time axis is never reordered).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortAxis {
    Term,
    Count,
}

/// Set operations on document id lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Intersect,
    Union,
    Difference,
}

/// Attributes available to projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Attr {
    Term,
    Ts,
    Count,
    Docs,
    Aux(String),
}

impl std::fmt::Display for Attr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Attr::Term => write!(f, "term"),
            Attr::Ts => write!(f, "ts"),
            Attr::Count => write!(f, "count"),
            Attr::Docs => write!(f, "docs"),
            Attr::Aux(name) => write!(f, "{name}"),
        }
    }
}

/// A projected cell value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttrValue {
    Term(String),
    Ts(Interval),
    Count(u64),
    Docs(Vec<DocId>),
    Aux(String),
}

impl std::fmt::Display for AttrValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttrValue::Term(t) => write!(f, "{t}"),
            AttrValue::Ts(i) => write!(f, "{i}"),
            AttrValue::Count(c) => write!(f, "{c}"),
            AttrValue::Docs(ids) => {
                let joined: Vec<String> = ids.iter().map(|d| d.to_string()).collect();
                write!(f, "{}", joined.join(","))
            }
            AttrValue::Aux(v) => write!(f, "{v}"),
        }
    }
}

/// Result of a projection: a column header plus tuple rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Bindings {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<AttrValue>>,
}

/// A histogram partitioned by grouping-variable values. Parts keep the full
/// aux schema of the input, so merging all parts restores the original.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedTth {
    pub group_schema: Vec<String>,
    pub parts: BTreeMap<Vec<String>, Tth>,
}

impl PartitionedTth {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Merge every part back into a single histogram.
    pub fn merge_all(&self) -> Result<Option<Tth>> {
        let mut acc: Option<Tth> = None;
        for part in self.parts.values() {
            acc = Some(match acc {
                None => part.clone(),
                Some(prev) => merge(&prev, part)?,
            });
        }
        Ok(acc)
    }
}

/// One row of a 1-D marginal histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalRow {
    pub key: MarginalKey,
    pub count: u64,
    pub docs: Vec<DocId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MarginalKey {
    Term(TermId),
    Ts(Interval),
}

/// Marginal histogram over a single remaining axis; counts sum to the input
/// total and doc lists are deduplicated unions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginal1d {
    /// The remaining axis (the other one was collapsed away).
    pub axis: Axis,
    pub rows: Vec<MarginalRow>,
}

impl Marginal1d {
    pub fn total_count(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Rows satisfying the predicate, grid and schema unchanged.
pub fn select(tth: &Tth, pred: &Predicate) -> Result<Tth> {
    pred.validate(tth)?;
    let rows = tth
        .iter()
        .filter(|(k, v)| pred.matches(tth, k, v))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(tth.with_rows(rows))
}

/// Project rows onto `attrs`, optionally dropping duplicate tuples.
pub fn project(tth: &Tth, attrs: &[Attr], distinct: bool) -> Result<Bindings> {
    let aux_pos: Vec<(usize, usize)> = attrs
        .iter()
        .enumerate()
        .filter_map(|(i, a)| match a {
            Attr::Aux(name) => Some((i, name)),
            _ => None,
        })
        .map(|(i, name)| {
            tth.aux_schema()
                .iter()
                .position(|a| a == name)
                .map(|p| (i, p))
                .ok_or_else(|| {
                    TthError::Schema(format!("projection references unknown attribute '{name}'"))
                })
        })
        .collect::<Result<_>>()?;
    let aux_of = |i: usize| aux_pos.iter().find(|(ai, _)| *ai == i).map(|(_, p)| *p);

    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (key, data) in tth.iter() {
        let tuple: Vec<AttrValue> = attrs
            .iter()
            .enumerate()
            .map(|(i, attr)| match attr {
                Attr::Term => AttrValue::Term(
                    tth.vocab().term(key.term).unwrap_or("<unknown>").to_string(),
                ),
                Attr::Ts => AttrValue::Ts(key.interval),
                Attr::Count => AttrValue::Count(data.count),
                Attr::Docs => AttrValue::Docs(data.docs.clone()),
                Attr::Aux(_) => {
                    AttrValue::Aux(key.aux[aux_of(i).expect("validated")].clone())
                }
            })
            .collect();
        if distinct && !seen.insert(tuple.clone()) {
            continue;
        }
        rows.push(tuple);
    }
    Ok(Bindings {
        columns: attrs.iter().map(|a| a.to_string()).collect(),
        rows,
    })
}

/// Re-bin onto a coarser grid whose width is a whole multiple of the current
/// width: counts are summed and doc lists unioned per new interval. An
/// optional window (dates on new-grid boundaries) restricts the output to
/// rows inside it.
pub fn coarsen(
    tth: &Tth,
    new_width: i64,
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
) -> Result<Tth> {
    if !matches!(tth.bins(), Binning::Uniform) {
        return Err(TthError::Alignment(
            "histogram uses explicit date ranges; re-bin it with a boundary list".into(),
        ));
    }
    let new_grid = tth.grid().coarser(new_width)?;
    let ratio = new_width / tth.grid().width_days();
    for (name, bound) in [("start", start), ("end", end)] {
        if let Some(date) = bound {
            if !new_grid.is_boundary(date) {
                return Err(TthError::Alignment(format!(
                    "window {name} {date} is not aligned with the {new_width}-day grid"
                )));
            }
        }
    }
    if let (Some(s), Some(e)) = (start, end) {
        if s > e {
            return Err(TthError::Range(format!("inverted window {s}..{e}")));
        }
    }

    let mut rows: BTreeMap<RowKey, RowData> = BTreeMap::new();
    for (key, data) in tth.iter() {
        let row_start = tth.interval_start(key.interval);
        if let Some(s) = start {
            if row_start < s {
                continue;
            }
        }
        if let Some(e) = end {
            if row_start >= e {
                continue;
            }
        }
        let new_interval = key.interval.div_euclid(ratio);
        let entry = rows
            .entry(RowKey::new(key.term, new_interval, key.aux.clone()))
            .or_insert_with(|| RowData {
                count: 0,
                docs: Vec::new(),
            });
        entry.count += data.count;
        entry.docs.extend(data.docs.iter().copied());
    }
    for data in rows.values_mut() {
        data.docs.sort_unstable();
        data.docs.dedup();
    }

    let mut out = tth.with_rows(rows);
    out.grid = new_grid;
    Ok(out)
}

/// Re-bin onto an explicit, strictly ascending date-boundary list (calendar
/// months, quarters). Every current bin overlapping a target range must be
/// fully contained in it, mirroring the containment validation of range
/// coarsening; bins outside every target range are dropped.
pub fn coarsen_to_ranges(tth: &Tth, boundaries: &[NaiveDate]) -> Result<Tth> {
    if boundaries.len() < 2 {
        return Err(TthError::Argument(
            "boundary list needs at least two dates".into(),
        ));
    }
    if boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TthError::Argument(
            "boundary dates must be strictly ascending".into(),
        ));
    }
    let ranges: Vec<(NaiveDate, NaiveDate)> = boundaries
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect();

    match tth.bins() {
        Binning::Uniform => {
            for b in boundaries {
                if !tth.grid().is_boundary(*b) {
                    return Err(TthError::Alignment(format!(
                        "boundary {b} is not aligned with the {}-day grid",
                        tth.grid().width_days()
                    )));
                }
            }
        }
        Binning::Ranges(old) => {
            for (os, oe) in old {
                for (ns, ne) in &ranges {
                    let overlaps = os < ne && oe > ns;
                    let contained = os >= ns && oe <= ne;
                    if overlaps && !contained {
                        return Err(TthError::Alignment(format!(
                            "range [{os}, {oe}) partially overlaps target range [{ns}, {ne})"
                        )));
                    }
                }
            }
        }
    }

    let mut rows: BTreeMap<RowKey, RowData> = BTreeMap::new();
    for (key, data) in tth.iter() {
        let row_start = tth.interval_start(key.interval);
        let target = ranges.iter().find(|(s, e)| row_start >= *s && row_start < *e);
        let Some((range_start, _)) = target else {
            continue;
        };
        let new_interval = tth.grid().interval_of(*range_start)?;
        let entry = rows
            .entry(RowKey::new(key.term, new_interval, key.aux.clone()))
            .or_insert_with(|| RowData {
                count: 0,
                docs: Vec::new(),
            });
        entry.count += data.count;
        entry.docs.extend(data.docs.iter().copied());
    }
    for data in rows.values_mut() {
        data.docs.sort_unstable();
        data.docs.dedup();
    }

    let mut out = tth.with_rows(rows);
    out.bins = Binning::Ranges(ranges);
    Ok(out)
}

/// Key-wise union of two aligned histograms. For a key present in both, the
/// doc lists are unioned and the count deduplicated so each document's
/// occurrences contribute once:
/// `count = a + b - sum over shared docs of forward(term, doc)`.
/// With disjoint doc lists this is plain addition.
pub fn merge(a: &Tth, b: &Tth) -> Result<Tth> {
    if a.grid() != b.grid() {
        return Err(TthError::Alignment(format!(
            "grids differ: ({}, {}d) vs ({}, {}d)",
            a.grid().origin(),
            a.grid().width_days(),
            b.grid().origin(),
            b.grid().width_days()
        )));
    }
    if a.aux_schema() != b.aux_schema() {
        return Err(TthError::Alignment(format!(
            "aux schemas differ: [{}] vs [{}]",
            a.aux_schema().join(", "),
            b.aux_schema().join(", ")
        )));
    }
    if !(Arc::ptr_eq(a.vocab(), b.vocab()) || a.vocab().as_ref() == b.vocab().as_ref()) {
        return Err(TthError::Alignment(
            "histograms use different vocabularies; load them together first".into(),
        ));
    }
    let bins = merged_bins(a, b)?;

    let mut rows: BTreeMap<RowKey, RowData> = a
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    for (key, bv) in b.iter() {
        match rows.get_mut(key) {
            None => {
                rows.insert(key.clone(), bv.clone());
            }
            Some(av) => {
                let shared: Vec<DocId> = intersect_sorted(&av.docs, &bv.docs);
                let mut count = av.count + bv.count;
                if !shared.is_empty() {
                    let forward = a.forward().or_else(|| b.forward()).ok_or_else(|| {
                        TthError::Dependency(
                            "merging overlapping doc lists requires the forward index".into(),
                        )
                    })?;
                    for doc in &shared {
                        let f = forward.get(key.term, *doc).ok_or_else(|| {
                            TthError::Dependency(format!(
                                "forward index has no count for {} in document {doc}",
                                a.describe_key(key)
                            ))
                        })?;
                        count -= f;
                    }
                }
                let mut docs = av.docs.clone();
                docs.extend(bv.docs.iter().copied());
                docs.sort_unstable();
                docs.dedup();
                *av = RowData { count, docs };
            }
        }
    }

    let mut out = a.with_rows(rows);
    out.bins = bins;
    if out.forward.is_none() {
        out.forward = b.forward().cloned();
    }
    Ok(out)
}

/// Validate range alignment for a merge: distinct date ranges from the two
/// inputs must not partially overlap. Returns the combined binning.
fn merged_bins(a: &Tth, b: &Tth) -> Result<Binning> {
    match (a.bins(), b.bins()) {
        (Binning::Uniform, Binning::Uniform) => Ok(Binning::Uniform),
        (Binning::Ranges(ra), Binning::Ranges(rb)) => {
            for (as_, ae) in ra {
                for (bs, be) in rb {
                    let equal = as_ == bs && ae == be;
                    let overlap = as_ < be && ae > bs;
                    if overlap && !equal {
                        return Err(TthError::Alignment(format!(
                            "ranges [{as_}, {ae}) and [{bs}, {be}) overlap without matching"
                        )));
                    }
                }
            }
            let mut merged: Vec<(NaiveDate, NaiveDate)> = ra.clone();
            for r in rb {
                if !merged.contains(r) {
                    merged.push(*r);
                }
            }
            merged.sort_unstable();
            Ok(Binning::Ranges(merged))
        }
        _ => Err(TthError::Alignment(
            "cannot merge a uniform histogram with a range-binned one".into(),
        )),
    }
}

/// Partition by grouping variables drawn from the aux schema. Only value
/// combinations that actually occur are materialized; each part keeps the
/// input's full aux columns.
pub fn group(tth: &Tth, vars: &[String]) -> Result<PartitionedTth> {
    let positions: Vec<usize> = vars
        .iter()
        .map(|v| {
            tth.aux_schema().iter().position(|a| a == v).ok_or_else(|| {
                TthError::Schema(format!("grouping variable '{v}' is not in the aux schema"))
            })
        })
        .collect::<Result<_>>()?;

    let mut parts: BTreeMap<Vec<String>, BTreeMap<RowKey, RowData>> = BTreeMap::new();
    if vars.is_empty() {
        parts.insert(Vec::new(), tth.iter().map(|(k, v)| (k.clone(), v.clone())).collect());
    } else {
        for (key, data) in tth.iter() {
            let group_key: Vec<String> =
                positions.iter().map(|&p| key.aux[p].clone()).collect();
            parts
                .entry(group_key)
                .or_default()
                .insert(key.clone(), data.clone());
        }
    }

    Ok(PartitionedTth {
        group_schema: vars.to_vec(),
        parts: parts
            .into_iter()
            .map(|(k, rows)| (k, tth.with_rows(rows)))
            .collect(),
    })
}

/// Rows in a deterministic total order along the requested axis. Ties break
/// by (term id asc, interval asc, aux lexicographic asc).
pub fn sort_by_axis(tth: &Tth, axis: SortAxis, descending: bool) -> Vec<TthRow> {
    let mut rows: Vec<TthRow> = tth.rows().collect();
    rows.sort_by(|a, b| {
        let primary = match axis {
            SortAxis::Term => a.term.cmp(&b.term),
            SortAxis::Count => a.count.cmp(&b.count),
        };
        let primary = if descending { primary.reverse() } else { primary };
        primary
            .then_with(|| a.term.cmp(&b.term))
            .then_with(|| a.interval.cmp(&b.interval))
            .then_with(|| a.aux.cmp(&b.aux))
    });
    rows
}

/// First `k` rows of an ordered view.
pub fn top(rows: Vec<TthRow>, k: usize) -> Vec<TthRow> {
    rows.into_iter().take(k).collect()
}

/// Marginalize the named axis away (auxiliary values are always folded in):
/// grouped count sums with deduplicated doc unions over the remaining axis.
pub fn collapse(tth: &Tth, axis: Axis) -> Marginal1d {
    let mut acc: BTreeMap<MarginalKey, (u64, BTreeSet<DocId>)> = BTreeMap::new();
    for (key, data) in tth.iter() {
        let mk = match axis {
            Axis::Term => MarginalKey::Ts(key.interval),
            Axis::Ts => MarginalKey::Term(key.term),
        };
        let entry = acc.entry(mk).or_insert((0, BTreeSet::new()));
        entry.0 += data.count;
        entry.1.extend(data.docs.iter().copied());
    }
    Marginal1d {
        axis: match axis {
            Axis::Term => Axis::Ts,
            Axis::Ts => Axis::Term,
        },
        rows: acc
            .into_iter()
            .map(|(key, (count, docs))| MarginalRow {
                key,
                count,
                docs: docs.into_iter().collect(),
            })
            .collect(),
    }
}

/// Distinct values along an axis, ascending (terms by id).
pub fn extract_axis(tth: &Tth, axis: Axis) -> Vec<MarginalKey> {
    let set: BTreeSet<MarginalKey> = tth
        .iter()
        .map(|(key, _)| match axis {
            Axis::Term => MarginalKey::Term(key.term),
            Axis::Ts => MarginalKey::Ts(key.interval),
        })
        .collect();
    set.into_iter().collect()
}

/// Set operation over two sorted duplicate-free document id lists.
pub fn index_op(op: SetOp, left: &[DocId], right: &[DocId]) -> Result<Vec<DocId>> {
    require_sorted(left, "left")?;
    require_sorted(right, "right")?;
    let result = match op {
        SetOp::Intersect => intersect_sorted(left, right),
        SetOp::Union => {
            let mut out: Vec<DocId> = left.iter().chain(right.iter()).copied().collect();
            out.sort_unstable();
            out.dedup();
            out
        }
        SetOp::Difference => {
            let mut out = Vec::new();
            let mut j = 0;
            for &d in left {
                while j < right.len() && right[j] < d {
                    j += 1;
                }
                if j >= right.len() || right[j] != d {
                    out.push(d);
                }
            }
            out
        }
    };
    Ok(result)
}

fn require_sorted(list: &[DocId], side: &str) -> Result<()> {
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TthError::Contract(format!(
            "{side} doc id list must be sorted and duplicate-free"
        )));
    }
    Ok(())
}

fn intersect_sorted(a: &[DocId], b: &[DocId]) -> Vec<DocId> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All (term, interval) pairs whose row doc list intersects `doc_ids`,
/// optionally restricted to intervals whose start date falls in
/// `[start, end)`.
pub fn query_index(
    tth: &Tth,
    doc_ids: &[DocId],
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
) -> Result<BTreeSet<(TermId, Interval)>> {
    require_sorted(doc_ids, "query")?;
    if let (Some(s), Some(e)) = (start, end) {
        if s > e {
            return Err(TthError::Range(format!("inverted window {s}..{e}")));
        }
    }
    let mut out = BTreeSet::new();
    for (key, data) in tth.iter() {
        let day = tth.interval_start(key.interval);
        if let Some(s) = start {
            if day < s {
                continue;
            }
        }
        if let Some(e) = end {
            if day >= e {
                continue;
            }
        }
        if !intersect_sorted(&data.docs, doc_ids).is_empty() {
            out.insert((key.term, key.interval));
        }
    }
    Ok(out)
}
