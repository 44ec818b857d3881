//! Histogram functions for `apply` / `applyArg`: builtin aggregates behind a
//! common trait, registered by name, plus user-registered extensions.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::{RowKey, Tth};

/// One result of a histogram function: a value plus the stored rows
/// associated with it (`apply` drops the rows, `applyArg` keeps them).
#[derive(Debug, Clone, PartialEq)]
pub struct FnValue {
    pub value: f64,
    pub rows: Vec<RowKey>,
}

/// A function evaluated over the count field of a histogram. Functions may
/// be multi-valued (modes, per-series slopes).
pub trait HistogramFn: Send + Sync {
    fn name(&self) -> &str;
    fn eval(&self, tth: &Tth, params: &[f64]) -> Result<Vec<FnValue>>;
}

/// Name-keyed registry of histogram functions.
pub struct FunctionRegistry {
    fns: BTreeMap<String, Arc<dyn HistogramFn>>,
}

impl FunctionRegistry {
    /// Registry with the builtin set: min, max, sum, mean, findModes,
    /// findMoments, findMaxSlope.
    pub fn builtin() -> Self {
        let mut reg = FunctionRegistry {
            fns: BTreeMap::new(),
        };
        reg.register(Arc::new(MinFn));
        reg.register(Arc::new(MaxFn));
        reg.register(Arc::new(SumFn));
        reg.register(Arc::new(MeanFn));
        reg.register(Arc::new(ModesFn));
        reg.register(Arc::new(MomentsFn));
        reg.register(Arc::new(MaxSlopeFn));
        reg
    }

    pub fn register(&mut self, f: Arc<dyn HistogramFn>) {
        self.fns.insert(f.name().to_string(), f);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn HistogramFn>> {
        self.fns.get(name).cloned().ok_or_else(|| {
            TthError::Registry(format!(
                "unknown histogram function '{name}' (registered: {})",
                self.fns.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fns.keys().map(String::as_str)
    }
}

impl Default for FunctionRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Evaluate a registered function, returning values only.
pub fn apply(tth: &Tth, registry: &FunctionRegistry, name: &str, params: &[f64]) -> Result<Vec<f64>> {
    Ok(apply_arg(tth, registry, name, params)?
        .into_iter()
        .map(|v| v.value)
        .collect())
}

/// Evaluate a registered function, keeping the rows behind each value.
pub fn apply_arg(
    tth: &Tth,
    registry: &FunctionRegistry,
    name: &str,
    params: &[f64],
) -> Result<Vec<FnValue>> {
    registry.get(name)?.eval(tth, params)
}

fn all_keys(tth: &Tth) -> Vec<RowKey> {
    tth.iter().map(|(k, _)| k.clone()).collect()
}

struct MinFn;

impl HistogramFn for MinFn {
    fn name(&self) -> &str {
        "min"
    }

    fn eval(&self, tth: &Tth, _params: &[f64]) -> Result<Vec<FnValue>> {
        let Some(best) = tth.iter().map(|(_, v)| v.count).min() else {
            return Ok(Vec::new());
        };
        Ok(vec![FnValue {
            value: best as f64,
            rows: tth
                .iter()
                .filter(|(_, v)| v.count == best)
                .map(|(k, _)| k.clone())
                .collect(),
        }])
    }
}

struct MaxFn;

impl HistogramFn for MaxFn {
    fn name(&self) -> &str {
        "max"
    }

    fn eval(&self, tth: &Tth, _params: &[f64]) -> Result<Vec<FnValue>> {
        let Some(best) = tth.iter().map(|(_, v)| v.count).max() else {
            return Ok(Vec::new());
        };
        Ok(vec![FnValue {
            value: best as f64,
            rows: tth
                .iter()
                .filter(|(_, v)| v.count == best)
                .map(|(k, _)| k.clone())
                .collect(),
        }])
    }
}

struct SumFn;

impl HistogramFn for SumFn {
    fn name(&self) -> &str {
        "sum"
    }

    fn eval(&self, tth: &Tth, _params: &[f64]) -> Result<Vec<FnValue>> {
        Ok(vec![FnValue {
            value: tth.total_count() as f64,
            rows: all_keys(tth),
        }])
    }
}

struct MeanFn;

impl HistogramFn for MeanFn {
    fn name(&self) -> &str {
        "mean"
    }

    fn eval(&self, tth: &Tth, _params: &[f64]) -> Result<Vec<FnValue>> {
        raw_moment(tth, 1)
    }
}

/// k-th raw moment of the stored counts: sum(c^k) / n.
struct MomentsFn;

impl HistogramFn for MomentsFn {
    fn name(&self) -> &str {
        "findMoments"
    }

    fn eval(&self, tth: &Tth, params: &[f64]) -> Result<Vec<FnValue>> {
        let k = params.first().copied().unwrap_or(1.0);
        if k < 1.0 || k.fract() != 0.0 {
            return Err(TthError::Argument(format!(
                "findMoments expects a positive integer order, got {k}"
            )));
        }
        raw_moment(tth, k as u32)
    }
}

fn raw_moment(tth: &Tth, k: u32) -> Result<Vec<FnValue>> {
    let n = tth.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sum: f64 = tth.iter().map(|(_, v)| (v.count as f64).powi(k as i32)).sum();
    Ok(vec![FnValue {
        value: sum / n as f64,
        rows: all_keys(tth),
    }])
}

/// Most frequent count value(s) over the stored rows, ascending; each mode is
/// paired with the rows carrying it.
struct ModesFn;

impl HistogramFn for ModesFn {
    fn name(&self) -> &str {
        "findModes"
    }

    fn eval(&self, tth: &Tth, _params: &[f64]) -> Result<Vec<FnValue>> {
        let mut freq: BTreeMap<u64, Vec<RowKey>> = BTreeMap::new();
        for (k, v) in tth.iter() {
            freq.entry(v.count).or_default().push(k.clone());
        }
        let Some(best) = freq.values().map(Vec::len).max() else {
            return Ok(Vec::new());
        };
        Ok(freq
            .into_iter()
            .filter(|(_, rows)| rows.len() == best)
            .map(|(count, rows)| FnValue {
                value: count as f64,
                rows,
            })
            .collect())
    }
}

/// Maximum forward difference of the count along the time axis, one value per
/// (term, aux) series. Gaps inside the histogram's interval span are
/// zero-filled before differencing; ties take the earliest edge. The rows of
/// each value are the stored rows at the winning edge's endpoints.
struct MaxSlopeFn;

impl HistogramFn for MaxSlopeFn {
    fn name(&self) -> &str {
        "findMaxSlope"
    }

    fn eval(&self, tth: &Tth, _params: &[f64]) -> Result<Vec<FnValue>> {
        let Some((lo, hi)) = tth.interval_span() else {
            return Ok(Vec::new());
        };
        let intervals = tth.intervals_between(lo, hi);
        if intervals.len() < 2 {
            return Ok(Vec::new());
        }

        let mut series: BTreeMap<(crate::vocab::TermId, Vec<String>), BTreeMap<Interval, u64>> =
            BTreeMap::new();
        for (key, data) in tth.iter() {
            series
                .entry((key.term, key.aux.clone()))
                .or_default()
                .insert(key.interval, data.count);
        }

        let mut out = Vec::new();
        for ((term, aux), counts) in series {
            let mut best: Option<(f64, (Interval, Interval))> = None;
            for pair in intervals.windows(2) {
                let c0 = counts.get(&pair[0]).copied().unwrap_or(0) as f64;
                let c1 = counts.get(&pair[1]).copied().unwrap_or(0) as f64;
                let slope = c1 - c0;
                if best.as_ref().is_none_or(|(b, _)| slope > *b) {
                    best = Some((slope, (pair[0], pair[1])));
                }
            }
            if let Some((slope, (i0, i1))) = best {
                let rows: Vec<RowKey> = [i0, i1]
                    .iter()
                    .map(|&i| RowKey::new(term, i, aux.clone()))
                    .filter(|k| tth.get_row(k).is_some())
                    .collect();
                out.push(FnValue { value: slope, rows });
            }
        }
        Ok(out)
    }
}
