//! Algebraic rewrite rules over plan expressions, applied to a fixed point.
//!
//! The standard set:
//! - `merge-left-assoc`: canonicalize merge trees to left-deep form
//!   (licensed by merge associativity).
//! - `coarsen-below-merge`: push a coarsen through a merge onto both inputs
//!   (merge/coarsen commutativity) so the merge runs on the smaller,
//!   re-binned histograms.
//! - `collapse-nested-coarsen`: fold `coarsen(coarsen(x, d1), d2)` into
//!   `coarsen(x, d2)` when `d2` is a multiple of `d1` (quasi-idempotence).
//!   The inner coarsen must be window-free: an inner window aligned to `d1`
//!   but not to `d2` would be rejected by the collapsed operator even though
//!   the nested form evaluates fine.

use super::expr::PlanExpr;
use crate::error::{Result, TthError};

/// A rewrite rule: matches a node shape and produces an equivalent node.
pub trait RewriteRule: Send + Sync {
    fn name(&self) -> &str;
    /// The rewritten node when the rule applies at `expr`'s root.
    fn try_rewrite(&self, expr: &PlanExpr) -> Option<PlanExpr>;
}

/// Name-keyed, ordered rule registry with fixed-point driving.
pub struct RuleSet {
    rules: Vec<Box<dyn RewriteRule>>,
}

impl RuleSet {
    /// The three standard rules.
    pub fn standard() -> Self {
        RuleSet {
            rules: vec![
                Box::new(MergeLeftAssoc),
                Box::new(CoarsenBelowMerge),
                Box::new(CollapseNestedCoarsen),
            ],
        }
    }

    pub fn empty() -> Self {
        RuleSet { rules: Vec::new() }
    }

    pub fn register(&mut self, rule: Box<dyn RewriteRule>) {
        self.rules.push(rule);
    }

    pub fn names(&self) -> Vec<&str> {
        self.rules.iter().map(|r| r.name()).collect()
    }

    /// Rewrite to a fixed point with bounded iterations. The expression must
    /// be well-typed; the result is observably equivalent to the input.
    pub fn rewrite(&self, expr: &PlanExpr) -> Result<PlanExpr> {
        Ok(self.rewrite_traced(expr)?.0)
    }

    /// Rewrite, also reporting which rules fired and how often.
    pub fn rewrite_traced(&self, expr: &PlanExpr) -> Result<(PlanExpr, Vec<String>)> {
        super::expr::typecheck(expr)?;
        let budget = expr.node_count() * self.rules.len().max(1) * 4;
        let mut current = expr.clone();
        let mut fired = Vec::new();
        for _ in 0..=budget {
            let mut changed = false;
            current = self.pass(current, &mut changed, &mut fired);
            if !changed {
                return Ok((current, fired));
            }
        }
        Err(TthError::PlanType(format!(
            "rewriting did not reach a fixed point within {budget} iterations"
        )))
    }

    /// One bottom-up pass: rewrite children first, then apply the first
    /// matching rule at this node (repeatedly, while any fires).
    fn pass(&self, expr: PlanExpr, changed: &mut bool, fired: &mut Vec<String>) -> PlanExpr {
        let expr = self.map_children(expr, changed, fired);
        let mut current = expr;
        loop {
            let mut applied = false;
            for rule in &self.rules {
                if let Some(next) = rule.try_rewrite(&current) {
                    fired.push(rule.name().to_string());
                    current = next;
                    *changed = true;
                    applied = true;
                    break;
                }
            }
            if !applied {
                return current;
            }
        }
    }

    fn map_children(&self, expr: PlanExpr, changed: &mut bool, fired: &mut Vec<String>) -> PlanExpr {
        let rec = |e: Box<PlanExpr>, changed: &mut bool, fired: &mut Vec<String>| {
            Box::new(self.pass(*e, changed, fired))
        };
        match expr {
            e @ (PlanExpr::Source(_) | PlanExpr::DocList(_)) => e,
            PlanExpr::Select { pred, input } => PlanExpr::Select {
                pred,
                input: rec(input, changed, fired),
            },
            PlanExpr::Project { attrs, distinct, input } => PlanExpr::Project {
                attrs,
                distinct,
                input: rec(input, changed, fired),
            },
            PlanExpr::Coarsen { width_days, start, end, input } => PlanExpr::Coarsen {
                width_days,
                start,
                end,
                input: rec(input, changed, fired),
            },
            PlanExpr::Merge { left, right } => PlanExpr::Merge {
                left: rec(left, changed, fired),
                right: rec(right, changed, fired),
            },
            PlanExpr::Group { vars, input } => PlanExpr::Group {
                vars,
                input: rec(input, changed, fired),
            },
            PlanExpr::Apply { func, params, input } => PlanExpr::Apply {
                func,
                params,
                input: rec(input, changed, fired),
            },
            PlanExpr::ApplyArg { func, params, input } => PlanExpr::ApplyArg {
                func,
                params,
                input: rec(input, changed, fired),
            },
            PlanExpr::SortByAxis { axis, descending, input } => PlanExpr::SortByAxis {
                axis,
                descending,
                input: rec(input, changed, fired),
            },
            PlanExpr::Top { k, input } => PlanExpr::Top {
                k,
                input: rec(input, changed, fired),
            },
            PlanExpr::Collapse { axis, input } => PlanExpr::Collapse {
                axis,
                input: rec(input, changed, fired),
            },
            PlanExpr::Distance { metric, left, right } => PlanExpr::Distance {
                metric,
                left: rec(left, changed, fired),
                right: rec(right, changed, fired),
            },
            PlanExpr::IndexOp { op, left, right } => PlanExpr::IndexOp {
                op,
                left: rec(left, changed, fired),
                right: rec(right, changed, fired),
            },
            PlanExpr::QueryIndex { docs, start, end, input } => PlanExpr::QueryIndex {
                docs,
                start,
                end,
                input: rec(input, changed, fired),
            },
            PlanExpr::ExtractAxis { axis, input } => PlanExpr::ExtractAxis {
                axis,
                input: rec(input, changed, fired),
            },
            PlanExpr::GetRecords { keys, input } => PlanExpr::GetRecords {
                keys,
                input: rec(input, changed, fired),
            },
        }
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::standard()
    }
}

/// merge(x, merge(y, z)) -> merge(merge(x, y), z)
struct MergeLeftAssoc;

impl RewriteRule for MergeLeftAssoc {
    fn name(&self) -> &str {
        "merge-left-assoc"
    }

    fn try_rewrite(&self, expr: &PlanExpr) -> Option<PlanExpr> {
        let PlanExpr::Merge { left, right } = expr else {
            return None;
        };
        let PlanExpr::Merge { left: rl, right: rr } = right.as_ref() else {
            return None;
        };
        Some(PlanExpr::Merge {
            left: Box::new(PlanExpr::Merge {
                left: left.clone(),
                right: rl.clone(),
            }),
            right: rr.clone(),
        })
    }
}

/// coarsen(merge(x, y), d) -> merge(coarsen(x, d), coarsen(y, d))
struct CoarsenBelowMerge;

impl RewriteRule for CoarsenBelowMerge {
    fn name(&self) -> &str {
        "coarsen-below-merge"
    }

    fn try_rewrite(&self, expr: &PlanExpr) -> Option<PlanExpr> {
        let PlanExpr::Coarsen { width_days, start, end, input } = expr else {
            return None;
        };
        let PlanExpr::Merge { left, right } = input.as_ref() else {
            return None;
        };
        Some(PlanExpr::Merge {
            left: Box::new(PlanExpr::Coarsen {
                width_days: *width_days,
                start: *start,
                end: *end,
                input: left.clone(),
            }),
            right: Box::new(PlanExpr::Coarsen {
                width_days: *width_days,
                start: *start,
                end: *end,
                input: right.clone(),
            }),
        })
    }
}

/// coarsen(coarsen(x, d1), d2) -> coarsen(x, d2) when d2 is a multiple of d1
/// and the inner coarsen carries no window.
struct CollapseNestedCoarsen;

impl RewriteRule for CollapseNestedCoarsen {
    fn name(&self) -> &str {
        "collapse-nested-coarsen"
    }

    fn try_rewrite(&self, expr: &PlanExpr) -> Option<PlanExpr> {
        let PlanExpr::Coarsen { width_days: outer, start, end, input } = expr else {
            return None;
        };
        let PlanExpr::Coarsen {
            width_days: inner,
            start: is,
            end: ie,
            input: inner_input,
        } = input.as_ref()
        else {
            return None;
        };
        if is.is_some() || ie.is_some() {
            return None;
        }
        if *inner < 1 || outer % inner != 0 {
            return None;
        }
        Some(PlanExpr::Coarsen {
            width_days: *outer,
            start: *start,
            end: *end,
            input: inner_input.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Predicate;

    fn src(n: &str) -> Box<PlanExpr> {
        Box::new(PlanExpr::source(n))
    }

    fn coarsen(w: i64, input: Box<PlanExpr>) -> Box<PlanExpr> {
        Box::new(PlanExpr::Coarsen {
            width_days: w,
            start: None,
            end: None,
            input,
        })
    }

    fn merge(l: Box<PlanExpr>, r: Box<PlanExpr>) -> Box<PlanExpr> {
        Box::new(PlanExpr::Merge { left: l, right: r })
    }

    #[test]
    fn pushes_coarsen_below_merge() {
        let rules = RuleSet::standard();
        let plan = *coarsen(2, merge(src("x"), src("y")));
        let rewritten = rules.rewrite(&plan).unwrap();
        assert_eq!(rewritten, *merge(coarsen(2, src("x")), coarsen(2, src("y"))));
    }

    #[test]
    fn collapses_nested_coarsens() {
        let rules = RuleSet::standard();
        let plan = *coarsen(4, coarsen(2, src("x")));
        assert_eq!(rules.rewrite(&plan).unwrap(), *coarsen(4, src("x")));
        // Non-multiple widths stay nested.
        let stuck = *coarsen(3, coarsen(2, src("x")));
        assert_eq!(rules.rewrite(&stuck).unwrap(), stuck);
    }

    #[test]
    fn canonicalizes_merges_left_deep() {
        let rules = RuleSet::standard();
        let plan = *merge(src("x"), merge(src("y"), src("z")));
        assert_eq!(
            rules.rewrite(&plan).unwrap(),
            *merge(merge(src("x"), src("y")), src("z"))
        );
    }

    #[test]
    fn expression_without_redex_is_unchanged() {
        let rules = RuleSet::standard();
        let plan = PlanExpr::Select {
            pred: Predicate::True,
            input: coarsen(2, src("x")),
        };
        let (rewritten, fired) = rules.rewrite_traced(&plan).unwrap();
        assert_eq!(rewritten, plan);
        assert!(fired.is_empty());
    }

    #[test]
    fn combined_rules_reach_fixed_point() {
        let rules = RuleSet::standard();
        // coarsen(coarsen(merge(x, merge(y, z)), 2), 6)
        let plan = *coarsen(6, coarsen(2, merge(src("x"), merge(src("y"), src("z")))));
        let rewritten = rules.rewrite(&plan).unwrap();
        let expected = *merge(
            merge(coarsen(6, src("x")), coarsen(6, src("y"))),
            coarsen(6, src("z")),
        );
        assert_eq!(rewritten, expected);
    }

    #[test]
    fn ill_typed_plans_are_rejected_before_rewriting() {
        let rules = RuleSet::standard();
        let bad = PlanExpr::Merge {
            left: Box::new(PlanExpr::DocList(Vec::new())),
            right: src("y"),
        };
        assert!(matches!(rules.rewrite(&bad), Err(TthError::PlanType(_))));
    }
}
