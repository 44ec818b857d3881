//! Query plans: expression trees over the algebra, a textual plan format,
//! equivalence-preserving rewrite rules, a cardinality cost heuristic, and a
//! bottom-up evaluator.

pub mod cost;
pub mod eval;
pub mod expr;
pub mod parse;
pub mod rules;

pub use cost::{estimate_cost, CostEstimate};
pub use eval::{
    evaluate, evaluate_with_stats, EvalContext, EvalStats, MarginalValue, PairsValue, RowsValue,
    Value, ValuesValue,
};
pub use expr::{typecheck, BaseKind, KeySpec, Kind, PlanExpr};
pub use parse::{parse_plan, print_plan};
pub use rules::{RewriteRule, RuleSet};
