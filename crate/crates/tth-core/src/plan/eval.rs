//! Bottom-up plan evaluation against named source bindings.
//!
//! Operators downstream of a `group` lift pointwise over the partitions, so
//! a grouped input flows through select/coarsen/sort/project/apply
//! unchanged in shape. Evaluation also counts the cardinality of every
//! intermediate histogram for plan-quality measurements.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{
    self, AttrValue, Axis, Bindings, DistanceRegistry, FnValue, FunctionRegistry, Marginal1d,
    MarginalKey,
};
use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::{RowKey, Tth, TthRow};
use crate::vocab::TermId;

use super::expr::{KeySpec, PlanExpr};

/// An ordered row view paired with the vocabulary its term ids refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct RowsValue {
    pub rows: Vec<TthRow>,
    pub vocab: std::sync::Arc<crate::vocab::Vocabulary>,
}

/// A marginal histogram paired with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalValue {
    pub marginal: Marginal1d,
    pub vocab: std::sync::Arc<crate::vocab::Vocabulary>,
}

/// Histogram-function results paired with their vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuesValue {
    pub values: Vec<FnValue>,
    pub vocab: std::sync::Arc<crate::vocab::Vocabulary>,
}

/// (term, interval) pairs paired with their vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct PairsValue {
    pub pairs: BTreeSet<(TermId, Interval)>,
    pub vocab: std::sync::Arc<crate::vocab::Vocabulary>,
}

/// A value produced by plan evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Tth(Tth),
    /// Partition key -> value, lifted over grouping.
    Grouped(Vec<(Vec<String>, Value)>),
    Rows(RowsValue),
    Marginal(MarginalValue),
    Bindings(Bindings),
    Values(ValuesValue),
    DocList(Vec<DocId>),
    Pairs(PairsValue),
    Num(f64),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Tth(_) => "histogram",
            Value::Grouped(_) => "grouped",
            Value::Rows(_) => "rows",
            Value::Marginal(_) => "marginal",
            Value::Bindings(_) => "bindings",
            Value::Values(_) => "values",
            Value::DocList(_) => "doc list",
            Value::Pairs(_) => "term-ts pairs",
            Value::Num(_) => "number",
        }
    }
}

/// Instrumentation collected while evaluating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Largest row count among operator results (sources excluded).
    pub max_intermediate_rows: u64,
    /// Operator nodes evaluated (per partition for lifted operators).
    pub nodes_evaluated: u64,
}

/// Evaluation context: source bindings plus the function and metric
/// registries.
pub struct EvalContext<'a> {
    pub sources: &'a BTreeMap<String, Tth>,
    pub functions: &'a FunctionRegistry,
    pub distances: &'a DistanceRegistry,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        sources: &'a BTreeMap<String, Tth>,
        functions: &'a FunctionRegistry,
        distances: &'a DistanceRegistry,
    ) -> Self {
        EvalContext {
            sources,
            functions,
            distances,
        }
    }
}

/// Evaluate a plan expression.
pub fn evaluate(expr: &PlanExpr, ctx: &EvalContext) -> Result<Value> {
    Ok(evaluate_with_stats(expr, ctx)?.0)
}

/// Evaluate and report intermediate-cardinality statistics.
pub fn evaluate_with_stats(expr: &PlanExpr, ctx: &EvalContext) -> Result<(Value, EvalStats)> {
    super::expr::typecheck(expr)?;
    let mut stats = EvalStats::default();
    let mut path = Vec::new();
    let value = eval_node(expr, ctx, &mut stats, &mut path)?;
    Ok((value, stats))
}

fn eval_node(
    expr: &PlanExpr,
    ctx: &EvalContext,
    stats: &mut EvalStats,
    path: &mut Vec<&'static str>,
) -> Result<Value> {
    path.push(expr.node_label());
    let result = eval_inner(expr, ctx, stats, path);
    let result = result.map_err(|e| match e {
        wrapped @ TthError::Eval { .. } => wrapped,
        source => TthError::Eval {
            path: path.join("/"),
            source: Box::new(source),
        },
    });
    path.pop();
    result
}

fn record(value: &Value, stats: &mut EvalStats) {
    stats.nodes_evaluated += 1;
    match value {
        Value::Tth(t) => {
            stats.max_intermediate_rows = stats.max_intermediate_rows.max(t.len() as u64);
        }
        Value::Grouped(parts) => {
            let rows: u64 = parts
                .iter()
                .map(|(_, v)| match v {
                    Value::Tth(t) => t.len() as u64,
                    _ => 0,
                })
                .sum();
            stats.max_intermediate_rows = stats.max_intermediate_rows.max(rows);
        }
        _ => {}
    }
}

/// Apply `op` to an input value, mapping over partitions when grouped.
fn lift<F>(input: Value, op: &mut F) -> Result<Value>
where
    F: FnMut(Value) -> Result<Value>,
{
    match input {
        Value::Grouped(parts) => {
            let mut out = Vec::with_capacity(parts.len());
            for (key, value) in parts {
                out.push((key, lift(value, op)?));
            }
            Ok(Value::Grouped(out))
        }
        other => op(other),
    }
}

fn expect_tth(value: Value) -> Result<Tth> {
    match value {
        Value::Tth(t) => Ok(t),
        other => Err(TthError::PlanType(format!(
            "expected a histogram, got {}",
            other.kind_name()
        ))),
    }
}

fn expect_rows(value: Value) -> Result<RowsValue> {
    match value {
        Value::Rows(r) => Ok(r),
        other => Err(TthError::PlanType(format!(
            "expected sorted rows, got {}",
            other.kind_name()
        ))),
    }
}

fn eval_inner(
    expr: &PlanExpr,
    ctx: &EvalContext,
    stats: &mut EvalStats,
    path: &mut Vec<&'static str>,
) -> Result<Value> {
    match expr {
        PlanExpr::Source(name) => {
            let tth = ctx.sources.get(name).ok_or_else(|| {
                TthError::Lookup(format!("source '{name}' is not bound"))
            })?;
            // Sources do not count toward intermediate cardinality.
            Ok(Value::Tth(tth.clone()))
        }
        PlanExpr::DocList(docs) => Ok(Value::DocList(docs.clone())),
        PlanExpr::Select { pred, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                Ok(Value::Tth(algebra::select(&expect_tth(v)?, pred)?))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Project { attrs, distinct, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let bindings = match v {
                    Value::Tth(t) => algebra::project(&t, attrs, *distinct)?,
                    Value::Rows(view) => project_rows(&view, attrs, *distinct)?,
                    other => {
                        return Err(TthError::PlanType(format!(
                            "project expects a histogram or rows, got {}",
                            other.kind_name()
                        )))
                    }
                };
                Ok(Value::Bindings(bindings))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Coarsen { width_days, start, end, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                Ok(Value::Tth(algebra::coarsen(
                    &expect_tth(v)?,
                    *width_days,
                    *start,
                    *end,
                )?))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Merge { left, right } => {
            let l = expect_tth(eval_node(left, ctx, stats, path)?)?;
            let r = expect_tth(eval_node(right, ctx, stats, path)?)?;
            let out = Value::Tth(algebra::merge(&l, &r)?);
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Group { vars, input } => {
            let input = expect_tth(eval_node(input, ctx, stats, path)?)?;
            let parts = algebra::group(&input, vars)?;
            let out = Value::Grouped(
                parts
                    .parts
                    .into_iter()
                    .map(|(k, t)| (k, Value::Tth(t)))
                    .collect(),
            );
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Apply { func, params, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                let mut values = algebra::apply_arg(&tth, ctx.functions, func, params)?;
                for v in &mut values {
                    v.rows.clear();
                }
                Ok(Value::Values(ValuesValue {
                    values,
                    vocab: std::sync::Arc::clone(tth.vocab()),
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::ApplyArg { func, params, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                Ok(Value::Values(ValuesValue {
                    values: algebra::apply_arg(&tth, ctx.functions, func, params)?,
                    vocab: std::sync::Arc::clone(tth.vocab()),
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::SortByAxis { axis, descending, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                Ok(Value::Rows(RowsValue {
                    rows: algebra::sort_by_axis(&tth, *axis, *descending),
                    vocab: std::sync::Arc::clone(tth.vocab()),
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Top { k, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let view = expect_rows(v)?;
                Ok(Value::Rows(RowsValue {
                    rows: algebra::top(view.rows, *k),
                    vocab: view.vocab,
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Collapse { axis, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                Ok(Value::Marginal(MarginalValue {
                    marginal: algebra::collapse(&tth, *axis),
                    vocab: std::sync::Arc::clone(tth.vocab()),
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::Distance { metric, left, right } => {
            let l = expect_tth(eval_node(left, ctx, stats, path)?)?;
            let r = expect_tth(eval_node(right, ctx, stats, path)?)?;
            let out = Value::Num(algebra::distance(&l, &r, ctx.distances, metric)?);
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::IndexOp { op, left, right } => {
            let l = eval_node(left, ctx, stats, path)?;
            let r = eval_node(right, ctx, stats, path)?;
            let (Value::DocList(l), Value::DocList(r)) = (l, r) else {
                return Err(TthError::PlanType("indexop expects doc lists".into()));
            };
            let out = Value::DocList(algebra::index_op(*op, &l, &r)?);
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::QueryIndex { docs, start, end, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                Ok(Value::Pairs(PairsValue {
                    pairs: algebra::query_index(&tth, docs, *start, *end)?,
                    vocab: std::sync::Arc::clone(tth.vocab()),
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::ExtractAxis { axis, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                let column = match axis {
                    Axis::Term => "term",
                    Axis::Ts => "ts",
                };
                let rows = algebra::extract_axis(&tth, *axis)
                    .into_iter()
                    .map(|k| match k {
                        MarginalKey::Term(id) => {
                            vec![AttrValue::Term(
                                tth.vocab().term(id).unwrap_or("<unknown>").to_string(),
                            )]
                        }
                        MarginalKey::Ts(i) => vec![AttrValue::Ts(i)],
                    })
                    .collect();
                Ok(Value::Bindings(Bindings {
                    columns: vec![column.to_string()],
                    rows,
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
        PlanExpr::GetRecords { keys, input } => {
            let input = eval_node(input, ctx, stats, path)?;
            let out = lift(input, &mut |v| {
                let tth = expect_tth(v)?;
                let keys = resolve_keys(&tth, keys)?;
                Ok(Value::Rows(RowsValue {
                    rows: tth.get_records(&keys)?,
                    vocab: std::sync::Arc::clone(tth.vocab()),
                }))
            })?;
            record(&out, stats);
            Ok(out)
        }
    }
}

fn resolve_keys(tth: &Tth, specs: &[KeySpec]) -> Result<Vec<RowKey>> {
    specs
        .iter()
        .map(|spec| {
            let term = tth.vocab().require(&spec.term)?;
            Ok(RowKey::new(term, spec.interval, spec.aux.clone()))
        })
        .collect()
}

/// Projection over an ordered row view: duplicates drop under `distinct`
/// while the view's order is retained (this is how top-k-then-distinct plans
/// pick leading terms).
fn project_rows(view: &RowsValue, attrs: &[crate::algebra::Attr], distinct: bool) -> Result<Bindings> {
    use crate::algebra::Attr;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for row in &view.rows {
        let tuple: Vec<AttrValue> = attrs
            .iter()
            .map(|attr| match attr {
                Attr::Term => Ok(AttrValue::Term(
                    view.vocab.term(row.term).unwrap_or("<unknown>").to_string(),
                )),
                Attr::Ts => Ok(AttrValue::Ts(row.interval)),
                Attr::Count => Ok(AttrValue::Count(row.count)),
                Attr::Docs => Ok(AttrValue::Docs(row.docs.clone())),
                Attr::Aux(name) => Err(TthError::Schema(format!(
                    "row views carry no named aux column '{name}'"
                ))),
            })
            .collect::<Result<_>>()?;
        if distinct && !seen.insert(tuple.clone()) {
            continue;
        }
        out.push(tuple);
    }
    Ok(Bindings {
        columns: attrs.iter().map(|a| a.to_string()).collect(),
        rows: out,
    })
}
