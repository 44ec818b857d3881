//! Query plans as expression trees over the histogram algebra.

use chrono::NaiveDate;

use crate::algebra::{Attr, Axis, Predicate, SetOp, SortAxis};
use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::Interval;

/// A row key spelled with the term string, as written in plan text.
#[derive(Debug, Clone, PartialEq)]
pub struct KeySpec {
    pub term: String,
    pub interval: Interval,
    pub aux: Vec<String>,
}

/// Plan expression nodes. Sources are named and bound at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanExpr {
    Source(String),
    DocList(Vec<DocId>),
    Select {
        pred: Predicate,
        input: Box<PlanExpr>,
    },
    Project {
        attrs: Vec<Attr>,
        distinct: bool,
        input: Box<PlanExpr>,
    },
    Coarsen {
        width_days: i64,
        start: Option<NaiveDate>,
        end: Option<NaiveDate>,
        input: Box<PlanExpr>,
    },
    Merge {
        left: Box<PlanExpr>,
        right: Box<PlanExpr>,
    },
    Group {
        vars: Vec<String>,
        input: Box<PlanExpr>,
    },
    Apply {
        func: String,
        params: Vec<f64>,
        input: Box<PlanExpr>,
    },
    ApplyArg {
        func: String,
        params: Vec<f64>,
        input: Box<PlanExpr>,
    },
    SortByAxis {
        axis: SortAxis,
        descending: bool,
        input: Box<PlanExpr>,
    },
    Top {
        k: usize,
        input: Box<PlanExpr>,
    },
    Collapse {
        axis: Axis,
        input: Box<PlanExpr>,
    },
    Distance {
        metric: String,
        left: Box<PlanExpr>,
        right: Box<PlanExpr>,
    },
    IndexOp {
        op: SetOp,
        left: Box<PlanExpr>,
        right: Box<PlanExpr>,
    },
    QueryIndex {
        docs: Vec<DocId>,
        start: Option<NaiveDate>,
        end: Option<NaiveDate>,
        input: Box<PlanExpr>,
    },
    ExtractAxis {
        axis: Axis,
        input: Box<PlanExpr>,
    },
    GetRecords {
        keys: Vec<KeySpec>,
        input: Box<PlanExpr>,
    },
}

impl PlanExpr {
    pub fn source(name: &str) -> PlanExpr {
        PlanExpr::Source(name.to_string())
    }

    pub fn node_label(&self) -> &'static str {
        match self {
            PlanExpr::Source(_) => "source",
            PlanExpr::DocList(_) => "docs",
            PlanExpr::Select { .. } => "select",
            PlanExpr::Project { .. } => "project",
            PlanExpr::Coarsen { .. } => "coarsen",
            PlanExpr::Merge { .. } => "merge",
            PlanExpr::Group { .. } => "group",
            PlanExpr::Apply { .. } => "apply",
            PlanExpr::ApplyArg { .. } => "applyarg",
            PlanExpr::SortByAxis { .. } => "sort",
            PlanExpr::Top { .. } => "top",
            PlanExpr::Collapse { .. } => "collapse",
            PlanExpr::Distance { .. } => "distance",
            PlanExpr::IndexOp { .. } => "indexop",
            PlanExpr::QueryIndex { .. } => "queryindex",
            PlanExpr::ExtractAxis { .. } => "extractaxis",
            PlanExpr::GetRecords { .. } => "getrecords",
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            PlanExpr::Source(_) | PlanExpr::DocList(_) => 0,
            PlanExpr::Select { input, .. }
            | PlanExpr::Project { input, .. }
            | PlanExpr::Coarsen { input, .. }
            | PlanExpr::Group { input, .. }
            | PlanExpr::Apply { input, .. }
            | PlanExpr::ApplyArg { input, .. }
            | PlanExpr::SortByAxis { input, .. }
            | PlanExpr::Top { input, .. }
            | PlanExpr::Collapse { input, .. }
            | PlanExpr::QueryIndex { input, .. }
            | PlanExpr::ExtractAxis { input, .. }
            | PlanExpr::GetRecords { input, .. } => input.node_count(),
            PlanExpr::Merge { left, right }
            | PlanExpr::Distance { left, right, .. }
            | PlanExpr::IndexOp { left, right, .. } => left.node_count() + right.node_count(),
        }
    }
}

/// Value kinds a plan node can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Tth,
    Rows,
    Marginal,
    Bindings,
    Values,
    DocList,
    Pairs,
    Scalar,
}

/// A kind plus whether the value is lifted over grouping partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kind {
    pub base: BaseKind,
    pub grouped: bool,
}

impl Kind {
    fn plain(base: BaseKind) -> Kind {
        Kind { base, grouped: false }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.grouped {
            write!(f, "grouped {:?}", self.base)
        } else {
            write!(f, "{:?}", self.base)
        }
    }
}

/// Infer the output kind of `expr`, rejecting ill-typed trees before any
/// rewriting or evaluation. Unary histogram operators lift pointwise over a
/// grouped input; binary operators require ungrouped operands.
pub fn typecheck(expr: &PlanExpr) -> Result<Kind> {
    check(expr, &mut Vec::new())
}

fn check(expr: &PlanExpr, path: &mut Vec<&'static str>) -> Result<Kind> {
    path.push(expr.node_label());
    let result = check_inner(expr, path);
    path.pop();
    result
}

fn type_err(path: &[&'static str], msg: String) -> TthError {
    TthError::PlanType(format!("at {}: {msg}", path.join("/")))
}

fn check_inner(expr: &PlanExpr, path: &mut Vec<&'static str>) -> Result<Kind> {
    use BaseKind::*;
    match expr {
        PlanExpr::Source(_) => Ok(Kind::plain(Tth)),
        PlanExpr::DocList(_) => Ok(Kind::plain(DocList)),
        PlanExpr::Select { input, .. } | PlanExpr::Coarsen { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(k)
        }
        PlanExpr::Project { input, .. } => {
            let k = expect_one_of(input, &[Tth, Rows], path)?;
            Ok(Kind { base: Bindings, grouped: k.grouped })
        }
        PlanExpr::Merge { left, right } => {
            expect_plain(left, Tth, path)?;
            expect_plain(right, Tth, path)?;
            Ok(Kind::plain(Tth))
        }
        PlanExpr::Group { input, .. } => {
            let k = check(input, path)?;
            if k.base != Tth || k.grouped {
                return Err(type_err(
                    path,
                    format!("group expects an ungrouped histogram, got {k}"),
                ));
            }
            Ok(Kind { base: Tth, grouped: true })
        }
        PlanExpr::Apply { input, .. } | PlanExpr::ApplyArg { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(Kind { base: Values, grouped: k.grouped })
        }
        PlanExpr::SortByAxis { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(Kind { base: Rows, grouped: k.grouped })
        }
        PlanExpr::Top { input, .. } => {
            let k = expect(input, Rows, path)?;
            Ok(k)
        }
        PlanExpr::Collapse { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(Kind { base: Marginal, grouped: k.grouped })
        }
        PlanExpr::Distance { left, right, .. } => {
            expect_plain(left, Tth, path)?;
            expect_plain(right, Tth, path)?;
            Ok(Kind::plain(Scalar))
        }
        PlanExpr::IndexOp { left, right, .. } => {
            expect_plain(left, DocList, path)?;
            expect_plain(right, DocList, path)?;
            Ok(Kind::plain(DocList))
        }
        PlanExpr::QueryIndex { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(Kind { base: Pairs, grouped: k.grouped })
        }
        PlanExpr::ExtractAxis { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(Kind { base: Bindings, grouped: k.grouped })
        }
        PlanExpr::GetRecords { input, .. } => {
            let k = expect(input, Tth, path)?;
            Ok(Kind { base: Rows, grouped: k.grouped })
        }
    }
}

fn expect(input: &PlanExpr, base: BaseKind, path: &mut Vec<&'static str>) -> Result<Kind> {
    let k = check(input, path)?;
    if k.base != base {
        return Err(type_err(
            path,
            format!("expected {:?} input, got {k}", base),
        ));
    }
    Ok(k)
}

fn expect_one_of(
    input: &PlanExpr,
    bases: &[BaseKind],
    path: &mut Vec<&'static str>,
) -> Result<Kind> {
    let k = check(input, path)?;
    if !bases.contains(&k.base) {
        return Err(type_err(
            path,
            format!("expected one of {bases:?}, got {k}"),
        ));
    }
    Ok(k)
}

fn expect_plain(input: &PlanExpr, base: BaseKind, path: &mut Vec<&'static str>) -> Result<Kind> {
    let k = expect(input, base, path)?;
    if k.grouped {
        return Err(type_err(
            path,
            format!("expected an ungrouped {base:?}, got {k}"),
        ));
    }
    Ok(k)
}
