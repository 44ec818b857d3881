//! Trendy terms: terms whose count exceeds the window average and whose
//! maximum temporal slope clears a threshold, with the documents behind the
//! spike.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::algebra::{self, Atom, Predicate};
use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::Tth;
use crate::vocab::TermId;

#[derive(Debug, Clone, PartialEq)]
pub struct TrendyTerm {
    pub term: TermId,
    pub max_slope: f64,
    /// (from, to) interval edge of the maximum slope on the analysis grid.
    pub edge: (Interval, Interval),
    /// Documents of the spike-side row at the edge.
    pub docs: Vec<DocId>,
}

/// Three-step pipeline over the `[start, end)` window:
/// candidate terms are those with at least one row whose count strictly
/// exceeds the window-average row count; each candidate's full series inside
/// the window (optionally coarsened first, gaps zero-filled) is scanned for
/// its maximum slope; terms whose slope exceeds `theta` are reported with
/// the documents of the spike row.
pub fn trendy_terms(
    tth: &Tth,
    start: NaiveDate,
    end: NaiveDate,
    theta: f64,
    coarsen_days: Option<i64>,
) -> Result<Vec<TrendyTerm>> {
    if start > end {
        return Err(TthError::Range(format!("inverted window {start}..{end}")));
    }
    let window = algebra::select(tth, &Predicate::atom(Atom::DateRange(start, end)))?;
    if window.is_empty() {
        return Ok(Vec::new());
    }

    // Window average over all stored rows, then candidate terms.
    let avg = window.total_count() as f64 / window.len() as f64;
    let mut candidates: Vec<TermId> = window
        .iter()
        .filter(|(_, data)| (data.count as f64) > avg)
        .map(|(key, _)| key.term)
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.is_empty() {
        return Ok(Vec::new());
    }

    let series_tth = match coarsen_days {
        Some(days) => algebra::coarsen(&window, days, None, None)?,
        None => window.clone(),
    };
    // Analysis span: the window expressed on the series grid, clamped to the
    // grid origin. A non-empty window guarantees end > origin.
    let span_lo = series_tth
        .grid()
        .interval_of(start.max(series_tth.grid().origin()))?;
    let last_day = end.pred_opt().unwrap_or(end);
    let span_hi = series_tth.grid().interval_of(last_day)?;
    if span_lo >= span_hi {
        return Ok(Vec::new());
    }

    // Per-term series with aux folded in.
    let mut series: BTreeMap<TermId, BTreeMap<Interval, u64>> = BTreeMap::new();
    for (key, data) in series_tth.iter() {
        *series
            .entry(key.term)
            .or_default()
            .entry(key.interval)
            .or_insert(0) += data.count;
    }

    let mut out = Vec::new();
    for term in candidates {
        let counts = series.get(&term).cloned().unwrap_or_default();
        let mut best: Option<(f64, (Interval, Interval))> = None;
        for i in span_lo..span_hi {
            let c0 = counts.get(&i).copied().unwrap_or(0) as f64;
            let c1 = counts.get(&(i + 1)).copied().unwrap_or(0) as f64;
            let slope = c1 - c0;
            if best.as_ref().is_none_or(|(b, _)| slope > *b) {
                best = Some((slope, (i, i + 1)));
            }
        }
        let Some((max_slope, edge)) = best else {
            continue;
        };
        if max_slope <= theta {
            continue;
        }
        let docs = spike_docs(&series_tth, term, edge);
        out.push(TrendyTerm {
            term,
            max_slope,
            edge,
            docs,
        });
    }
    out.sort_by(|a, b| {
        b.max_slope
            .partial_cmp(&a.max_slope)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(out)
}

/// Documents of the rows at the spike end of the edge (falling back to the
/// leading end when the spike side has no stored rows).
fn spike_docs(tth: &Tth, term: TermId, edge: (Interval, Interval)) -> Vec<DocId> {
    let collect = |interval: Interval| -> Vec<DocId> {
        let mut docs: Vec<DocId> = tth
            .iter()
            .filter(|(k, _)| k.term == term && k.interval == interval)
            .flat_map(|(_, d)| d.docs.iter().copied())
            .collect();
        docs.sort_unstable();
        docs.dedup();
        docs
    };
    let spike = collect(edge.1);
    if spike.is_empty() {
        collect(edge.0)
    } else {
        spike
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::grid::TimeGrid;
    use crate::tth::TthRow;
    use crate::vocab::Vocabulary;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    /// Daily histogram: background term t1 constant, planted term t0 with
    /// the given per-day counts.
    fn planted(counts: &[u64]) -> Tth {
        let mut vocab = Vocabulary::new();
        vocab.intern("planted");
        vocab.intern("background");
        let mut rows = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                rows.push(TthRow {
                    term: TermId(0),
                    interval: i as i64,
                    count: c,
                    docs: vec![DocId(100 + i as u64)],
                    aux: Vec::new(),
                });
            }
            rows.push(TthRow {
                term: TermId(1),
                interval: i as i64,
                count: 1,
                docs: vec![DocId(200 + i as u64)],
                aux: Vec::new(),
            });
        }
        Tth::from_rows(
            TimeGrid::new(d("2017-01-01"), 1).unwrap(),
            "text",
            Vec::new(),
            Arc::new(vocab),
            None,
            rows,
        )
        .unwrap()
    }

    #[test]
    fn planted_spike_is_detected_with_its_documents() {
        let tth = planted(&[1, 1, 1, 10]);
        let hits = trendy_terms(&tth, d("2017-01-01"), d("2017-01-05"), 5.0, None).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].term, TermId(0));
        // Slope over the raw series [1,1,1,10].
        assert_eq!(hits[0].max_slope, 9.0);
        assert_eq!(hits[0].edge, (2, 3));
        assert_eq!(hits[0].docs, vec![DocId(103)]);
    }

    #[test]
    fn theta_above_every_slope_gives_empty_result() {
        let tth = planted(&[1, 1, 1, 10]);
        let hits = trendy_terms(&tth, d("2017-01-01"), d("2017-01-05"), 50.0, None).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn uniform_counts_give_empty_result() {
        let tth = planted(&[0, 0, 0, 0]);
        let hits = trendy_terms(&tth, d("2017-01-01"), d("2017-01-05"), 0.0, None).unwrap();
        assert!(hits.is_empty(), "no count strictly exceeds the average");
    }

    #[test]
    fn empty_window_gives_empty_result() {
        let tth = planted(&[1, 1, 1, 10]);
        let hits = trendy_terms(&tth, d("2018-01-01"), d("2018-02-01"), 0.0, None).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn doubling_counts_needs_doubled_theta() {
        // Two rising terms with slopes 9 and 3 over a constant background.
        let build = |scale: u64| {
            let mut vocab = Vocabulary::new();
            vocab.intern("fast");
            vocab.intern("slow");
            vocab.intern("flat");
            let counts = [
                (0u32, [1u64, 1, 1, 10]),
                (1, [1, 1, 4, 1]),
                (2, [1, 1, 1, 1]),
            ];
            let rows = counts.iter().flat_map(|&(t, per_day)| {
                per_day.into_iter().enumerate().map(move |(i, c)| TthRow {
                    term: TermId(t),
                    interval: i as i64,
                    count: c * scale,
                    docs: vec![DocId(t as u64 * 10 + i as u64)],
                    aux: Vec::new(),
                })
            });
            Tth::from_rows(
                TimeGrid::new(d("2017-01-01"), 1).unwrap(),
                "text",
                Vec::new(),
                Arc::new(vocab),
                None,
                rows,
            )
            .unwrap()
        };
        let single = build(1);
        let doubled = build(2);
        let (start, end) = (d("2017-01-01"), d("2017-01-05"));

        let base = trendy_terms(&single, start, end, 5.0, None).unwrap();
        let same_theta = trendy_terms(&doubled, start, end, 5.0, None).unwrap();
        let scaled_theta = trendy_terms(&doubled, start, end, 10.0, None).unwrap();

        // Theta scaled with the counts reproduces the detection set with
        // doubled slopes; an unscaled theta now also passes the slower term.
        assert_eq!(
            base.iter().map(|h| (h.term, h.edge)).collect::<Vec<_>>(),
            scaled_theta.iter().map(|h| (h.term, h.edge)).collect::<Vec<_>>()
        );
        for (b, s) in base.iter().zip(&scaled_theta) {
            assert_eq!(s.max_slope, 2.0 * b.max_slope);
        }
        assert_eq!(base.len(), 1);
        assert_eq!(same_theta.len(), 2);
    }
}
