//! Cardinality-based cost heuristic for plan expressions.
//!
//! Every node charges work proportional to its input rows; merge output is
//! the sum of its input rows, coarsen output divides by the width ratio
//! (floored at one row). The estimate is reported alongside rewriting and is
//! not used to gate rules.

use std::collections::BTreeMap;

use super::expr::PlanExpr;
use crate::error::{Result, TthError};

/// Cost estimate of a subtree: accumulated work, output cardinality, and the
/// time-grid width factor (sources count as width 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub cost: f64,
    pub rows: f64,
    pub width: f64,
}

/// Estimate the evaluation cost of `expr` given per-source row counts.
pub fn estimate_cost(expr: &PlanExpr, stats: &BTreeMap<String, u64>) -> Result<CostEstimate> {
    match expr {
        PlanExpr::Source(name) => {
            let rows = *stats.get(name).ok_or_else(|| {
                TthError::Estimation(format!("no row-count statistics for source '{name}'"))
            })? as f64;
            Ok(CostEstimate {
                cost: rows,
                rows,
                width: 1.0,
            })
        }
        PlanExpr::DocList(docs) => Ok(CostEstimate {
            cost: docs.len() as f64,
            rows: docs.len() as f64,
            width: 1.0,
        }),
        PlanExpr::Coarsen { width_days, input, .. } => {
            let child = estimate_cost(input, stats)?;
            let ratio = (*width_days as f64 / child.width).max(1.0);
            Ok(CostEstimate {
                cost: child.cost + child.rows,
                rows: (child.rows / ratio).max(1.0),
                width: *width_days as f64,
            })
        }
        PlanExpr::Merge { left, right } => {
            let l = estimate_cost(left, stats)?;
            let r = estimate_cost(right, stats)?;
            Ok(CostEstimate {
                cost: l.cost + r.cost + l.rows + r.rows,
                rows: l.rows + r.rows,
                width: l.width.max(r.width),
            })
        }
        PlanExpr::Distance { left, right, .. } | PlanExpr::IndexOp { left, right, .. } => {
            let l = estimate_cost(left, stats)?;
            let r = estimate_cost(right, stats)?;
            Ok(CostEstimate {
                cost: l.cost + r.cost + l.rows + r.rows,
                rows: 1.0,
                width: l.width.max(r.width),
            })
        }
        PlanExpr::Select { input, .. }
        | PlanExpr::Project { input, .. }
        | PlanExpr::Group { input, .. }
        | PlanExpr::Apply { input, .. }
        | PlanExpr::ApplyArg { input, .. }
        | PlanExpr::SortByAxis { input, .. }
        | PlanExpr::Top { input, .. }
        | PlanExpr::Collapse { input, .. }
        | PlanExpr::QueryIndex { input, .. }
        | PlanExpr::ExtractAxis { input, .. }
        | PlanExpr::GetRecords { input, .. } => {
            let child = estimate_cost(input, stats)?;
            Ok(CostEstimate {
                cost: child.cost + child.rows,
                rows: child.rows,
                width: child.width,
            })
        }
    }
}
