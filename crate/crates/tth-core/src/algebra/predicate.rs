//! Row predicates: boolean combinations of atoms over the term, time, count,
//! document-list, and auxiliary properties of a histogram row.

use chrono::NaiveDate;

use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::tth::{RowData, RowKey, Tth};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds<T: PartialOrd>(self, left: T, right: T) -> bool {
        match self {
            CmpOp::Eq => left == right,
            CmpOp::Ne => left != right,
            CmpOp::Lt => left < right,
            CmpOp::Le => left <= right,
            CmpOp::Gt => left > right,
            CmpOp::Ge => left >= right,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// An atomic condition on a single row property. Term atoms reference terms
/// by string and match nothing when the term is unknown; date atoms compare
/// against the row interval's start date; doc atoms test whether the row's
/// document list intersects the given set or range.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    TermEq(String),
    TermIn(Vec<String>),
    TsCmp(CmpOp, Interval),
    TsIn(Vec<Interval>),
    DateCmp(CmpOp, NaiveDate),
    DateRange(NaiveDate, NaiveDate),
    CountCmp(CmpOp, u64),
    DocIn(Vec<DocId>),
    DocRange(DocId, DocId),
    AuxEq(String, String),
    AuxIn(String, Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    True,
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
    Atom(Atom),
}

impl Predicate {
    pub fn atom(a: Atom) -> Self {
        Predicate::Atom(a)
    }

    pub fn and(self, other: Predicate) -> Self {
        Predicate::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Predicate) -> Self {
        Predicate::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        Predicate::Not(Box::new(self))
    }

    /// Check that every aux attribute referenced exists in the target schema.
    pub fn validate(&self, tth: &Tth) -> Result<()> {
        match self {
            Predicate::True => Ok(()),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.validate(tth)?;
                b.validate(tth)
            }
            Predicate::Not(p) => p.validate(tth),
            Predicate::Atom(Atom::AuxEq(name, _)) | Predicate::Atom(Atom::AuxIn(name, _)) => {
                if tth.aux_schema().iter().any(|a| a == name) {
                    Ok(())
                } else {
                    Err(TthError::Schema(format!(
                        "predicate references unknown aux attribute '{name}'"
                    )))
                }
            }
            Predicate::Atom(_) => Ok(()),
        }
    }

    /// True when only term and aux atoms occur; such predicates commute with
    /// time-axis coarsening (count and time atoms do not).
    pub fn is_time_invariant(&self) -> bool {
        match self {
            Predicate::True => true,
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.is_time_invariant() && b.is_time_invariant()
            }
            Predicate::Not(p) => p.is_time_invariant(),
            Predicate::Atom(a) => matches!(
                a,
                Atom::TermEq(_) | Atom::TermIn(_) | Atom::AuxEq(_, _) | Atom::AuxIn(_, _)
            ),
        }
    }

    pub(crate) fn matches(&self, tth: &Tth, key: &RowKey, data: &RowData) -> bool {
        match self {
            Predicate::True => true,
            Predicate::And(a, b) => a.matches(tth, key, data) && b.matches(tth, key, data),
            Predicate::Or(a, b) => a.matches(tth, key, data) || b.matches(tth, key, data),
            Predicate::Not(p) => !p.matches(tth, key, data),
            Predicate::Atom(atom) => atom_matches(atom, tth, key, data),
        }
    }
}

fn atom_matches(atom: &Atom, tth: &Tth, key: &RowKey, data: &RowData) -> bool {
    match atom {
        Atom::TermEq(term) => tth.vocab().lookup(term) == Some(key.term),
        Atom::TermIn(terms) => terms
            .iter()
            .any(|t| tth.vocab().lookup(t) == Some(key.term)),
        Atom::TsCmp(op, value) => op.holds(key.interval, *value),
        Atom::TsIn(values) => values.contains(&key.interval),
        Atom::DateCmp(op, date) => op.holds(tth.interval_start(key.interval), *date),
        Atom::DateRange(start, end) => {
            let d = tth.interval_start(key.interval);
            d >= *start && d < *end
        }
        Atom::CountCmp(op, value) => op.holds(data.count, *value),
        Atom::DocIn(ids) => data.docs.iter().any(|d| ids.contains(d)),
        Atom::DocRange(lo, hi) => data.docs.iter().any(|d| d >= lo && d <= hi),
        Atom::AuxEq(name, value) => aux_value(tth, key, name) == Some(value.as_str()),
        Atom::AuxIn(name, values) => {
            aux_value(tth, key, name).is_some_and(|v| values.iter().any(|x| x == v))
        }
    }
}

fn aux_value<'a>(tth: &Tth, key: &'a RowKey, name: &str) -> Option<&'a str> {
    let pos = tth.aux_schema().iter().position(|a| a == name)?;
    key.aux.get(pos).map(String::as_str)
}
