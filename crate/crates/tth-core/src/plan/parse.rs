//! Textual plan format: s-expressions parsed into [`PlanExpr`] trees and
//! printed back canonically, with `parse(print(e)) == e`.
//!
//! ```text
//! (project (ts) distinct (select (= term "tax cut") (source articles)))
//! (merge (coarsen 5 (source a)) (coarsen 5 (source b)))
//! (apply findMoments (1) (source a))
//! ```

use chrono::NaiveDate;

use crate::algebra::{Atom, Attr, Axis, CmpOp, Predicate, SetOp, SortAxis};
use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::parse_iso_date;

use super::expr::{KeySpec, PlanExpr};

#[derive(Debug, Clone, PartialEq)]
enum SExpr {
    Atom(String),
    Str(String),
    List(Vec<SExpr>),
}

fn err(msg: impl Into<String>) -> TthError {
    TthError::Parse(format!("plan text: {}", msg.into()))
}

// --- tokenizer / reader ---

fn read_sexpr(text: &str) -> Result<SExpr> {
    let mut tokens = lex(text)?;
    tokens.reverse();
    let expr = parse_tokens(&mut tokens)?;
    if !tokens.is_empty() {
        return Err(err("trailing input after expression"));
    }
    Ok(expr)
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
    Str(String),
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(err("unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            other => {
                                return Err(err(format!("bad escape '\\{:?}'", other)))
                            }
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                tokens.push(Token::Str(s));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == '"' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                tokens.push(Token::Atom(s));
            }
        }
    }
    Ok(tokens)
}

fn parse_tokens(tokens: &mut Vec<Token>) -> Result<SExpr> {
    match tokens.pop() {
        None => Err(err("unexpected end of input")),
        Some(Token::Atom(a)) => Ok(SExpr::Atom(a)),
        Some(Token::Str(s)) => Ok(SExpr::Str(s)),
        Some(Token::Close) => Err(err("unexpected ')'")),
        Some(Token::Open) => {
            let mut items = Vec::new();
            loop {
                match tokens.last() {
                    None => return Err(err("unbalanced '('")),
                    Some(Token::Close) => {
                        tokens.pop();
                        return Ok(SExpr::List(items));
                    }
                    _ => items.push(parse_tokens(tokens)?),
                }
            }
        }
    }
}

// --- plan construction ---

/// Parse plan text into an expression tree.
pub fn parse_plan(text: &str) -> Result<PlanExpr> {
    build_expr(&read_sexpr(text)?)
}

fn head(list: &[SExpr]) -> Result<&str> {
    match list.first() {
        Some(SExpr::Atom(a)) => Ok(a.as_str()),
        _ => Err(err("expected an operator name")),
    }
}

fn as_atom(e: &SExpr, what: &str) -> Result<String> {
    match e {
        SExpr::Atom(a) => Ok(a.clone()),
        SExpr::Str(s) => Ok(s.clone()),
        _ => Err(err(format!("expected {what}, got a list"))),
    }
}

fn as_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    match e {
        SExpr::List(items) => Ok(items),
        _ => Err(err(format!("expected {what} list"))),
    }
}

fn as_i64(e: &SExpr, what: &str) -> Result<i64> {
    as_atom(e, what)?
        .parse()
        .map_err(|_| err(format!("expected integer {what}")))
}

fn as_u64(e: &SExpr, what: &str) -> Result<u64> {
    as_atom(e, what)?
        .parse()
        .map_err(|_| err(format!("expected non-negative integer {what}")))
}

fn as_f64(e: &SExpr, what: &str) -> Result<f64> {
    as_atom(e, what)?
        .parse()
        .map_err(|_| err(format!("expected number {what}")))
}

fn as_date(e: &SExpr, what: &str) -> Result<NaiveDate> {
    parse_iso_date(&as_atom(e, what)?)
}

fn doc_list(e: &SExpr) -> Result<Vec<DocId>> {
    let items = as_list(e, "doc id")?;
    if head(items)? != "docs" {
        return Err(err("expected a (docs ...) list"));
    }
    items[1..]
        .iter()
        .map(|x| as_u64(x, "doc id").map(DocId))
        .collect()
}

/// Optional trailing `(window START END)` list before the input expression.
fn split_window(args: &[SExpr]) -> Result<(Option<NaiveDate>, Option<NaiveDate>, &[SExpr])> {
    if let Some(SExpr::List(items)) = args.first() {
        if matches!(head(items), Ok("window")) {
            if items.len() != 3 {
                return Err(err("window takes exactly a start and an end date"));
            }
            let parse = |e: &SExpr| -> Result<Option<NaiveDate>> {
                let raw = as_atom(e, "window date")?;
                if raw == "*" {
                    Ok(None)
                } else {
                    Ok(Some(parse_iso_date(&raw)?))
                }
            };
            return Ok((parse(&items[1])?, parse(&items[2])?, &args[1..]));
        }
    }
    Ok((None, None, args))
}

fn build_expr(e: &SExpr) -> Result<PlanExpr> {
    let items = as_list(e, "plan expression")?;
    let op = head(items)?;
    let args = &items[1..];
    match op {
        "source" => {
            let [name] = args else {
                return Err(err("source takes one name"));
            };
            Ok(PlanExpr::Source(as_atom(name, "source name")?))
        }
        "docs" => Ok(PlanExpr::DocList(
            args.iter()
                .map(|x| as_u64(x, "doc id").map(DocId))
                .collect::<Result<_>>()?,
        )),
        "select" => {
            let [pred, input] = args else {
                return Err(err("select takes a predicate and an input"));
            };
            Ok(PlanExpr::Select {
                pred: build_pred(pred)?,
                input: Box::new(build_expr(input)?),
            })
        }
        "project" => {
            let (attrs, rest) = match args {
                [attrs, rest @ ..] if !rest.is_empty() => (attrs, rest),
                _ => return Err(err("project takes an attribute list and an input")),
            };
            let attrs = as_list(attrs, "attribute")?
                .iter()
                .map(build_attr)
                .collect::<Result<Vec<_>>>()?;
            let (distinct, input) = match rest {
                [input] => (false, input),
                [flag, input] if as_atom(flag, "distinct")? == "distinct" => (true, input),
                _ => return Err(err("project accepts an optional 'distinct' flag")),
            };
            Ok(PlanExpr::Project {
                attrs,
                distinct,
                input: Box::new(build_expr(input)?),
            })
        }
        "coarsen" => {
            let (width, rest) = match args {
                [width, rest @ ..] if !rest.is_empty() => (as_i64(width, "width")?, rest),
                _ => return Err(err("coarsen takes a width and an input")),
            };
            let (start, end, rest) = split_window(rest)?;
            let [input] = rest else {
                return Err(err("coarsen takes exactly one input"));
            };
            Ok(PlanExpr::Coarsen {
                width_days: width,
                start,
                end,
                input: Box::new(build_expr(input)?),
            })
        }
        "merge" => {
            let [left, right] = args else {
                return Err(err("merge takes two inputs"));
            };
            Ok(PlanExpr::Merge {
                left: Box::new(build_expr(left)?),
                right: Box::new(build_expr(right)?),
            })
        }
        "group" => {
            let [vars, input] = args else {
                return Err(err("group takes a variable list and an input"));
            };
            Ok(PlanExpr::Group {
                vars: as_list(vars, "grouping variable")?
                    .iter()
                    .map(|v| as_atom(v, "grouping variable"))
                    .collect::<Result<_>>()?,
                input: Box::new(build_expr(input)?),
            })
        }
        "apply" | "applyarg" => {
            let [func, params, input] = args else {
                return Err(err(format!("{op} takes a function, params, and an input")));
            };
            let func = as_atom(func, "function name")?;
            let params = as_list(params, "parameter")?
                .iter()
                .map(|p| as_f64(p, "parameter"))
                .collect::<Result<_>>()?;
            let input = Box::new(build_expr(input)?);
            Ok(if op == "apply" {
                PlanExpr::Apply { func, params, input }
            } else {
                PlanExpr::ApplyArg { func, params, input }
            })
        }
        "sort" => {
            let [axis, order, input] = args else {
                return Err(err("sort takes an axis, an order, and an input"));
            };
            let axis = match as_atom(axis, "sort axis")?.as_str() {
                "term" => SortAxis::Term,
                "count" => SortAxis::Count,
                other => return Err(err(format!("unknown sort axis '{other}'"))),
            };
            let descending = match as_atom(order, "sort order")?.as_str() {
                "asc" => false,
                "desc" => true,
                other => return Err(err(format!("unknown sort order '{other}'"))),
            };
            Ok(PlanExpr::SortByAxis {
                axis,
                descending,
                input: Box::new(build_expr(input)?),
            })
        }
        "top" => {
            let [k, input] = args else {
                return Err(err("top takes k and an input"));
            };
            Ok(PlanExpr::Top {
                k: as_u64(k, "k")? as usize,
                input: Box::new(build_expr(input)?),
            })
        }
        "collapse" | "extractaxis" => {
            let [axis, input] = args else {
                return Err(err(format!("{op} takes an axis and an input")));
            };
            let axis = build_axis(axis)?;
            let input = Box::new(build_expr(input)?);
            Ok(if op == "collapse" {
                PlanExpr::Collapse { axis, input }
            } else {
                PlanExpr::ExtractAxis { axis, input }
            })
        }
        "distance" => {
            let [metric, left, right] = args else {
                return Err(err("distance takes a metric and two inputs"));
            };
            Ok(PlanExpr::Distance {
                metric: as_atom(metric, "metric")?,
                left: Box::new(build_expr(left)?),
                right: Box::new(build_expr(right)?),
            })
        }
        "indexop" => {
            let [setop, left, right] = args else {
                return Err(err("indexop takes an operation and two inputs"));
            };
            let op = match as_atom(setop, "set operation")?.as_str() {
                "union" => SetOp::Union,
                "intersect" => SetOp::Intersect,
                "difference" => SetOp::Difference,
                other => return Err(err(format!("unknown set operation '{other}'"))),
            };
            Ok(PlanExpr::IndexOp {
                op,
                left: Box::new(build_expr(left)?),
                right: Box::new(build_expr(right)?),
            })
        }
        "queryindex" => {
            let (docs, rest) = match args {
                [docs, rest @ ..] if !rest.is_empty() => (doc_list(docs)?, rest),
                _ => return Err(err("queryindex takes a doc list and an input")),
            };
            let (start, end, rest) = split_window(rest)?;
            let [input] = rest else {
                return Err(err("queryindex takes exactly one input"));
            };
            Ok(PlanExpr::QueryIndex {
                docs,
                start,
                end,
                input: Box::new(build_expr(input)?),
            })
        }
        "getrecords" => {
            let [keys, input] = args else {
                return Err(err("getrecords takes a key list and an input"));
            };
            let keys = as_list(keys, "row key")?
                .iter()
                .map(|k| {
                    let parts = as_list(k, "row key")?;
                    if parts.len() < 2 {
                        return Err(err("a row key needs a term and an interval"));
                    }
                    Ok(KeySpec {
                        term: as_atom(&parts[0], "term")?,
                        interval: as_i64(&parts[1], "interval")?,
                        aux: parts[2..]
                            .iter()
                            .map(|a| as_atom(a, "aux value"))
                            .collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(PlanExpr::GetRecords {
                keys,
                input: Box::new(build_expr(input)?),
            })
        }
        other => Err(err(format!("unknown operator '{other}'"))),
    }
}

fn build_axis(e: &SExpr) -> Result<Axis> {
    match as_atom(e, "axis")?.as_str() {
        "term" => Ok(Axis::Term),
        "ts" => Ok(Axis::Ts),
        other => Err(err(format!("unknown axis '{other}'"))),
    }
}

fn build_attr(e: &SExpr) -> Result<Attr> {
    Ok(match as_atom(e, "attribute")?.as_str() {
        "term" => Attr::Term,
        "ts" => Attr::Ts,
        "count" => Attr::Count,
        "docs" => Attr::Docs,
        name => Attr::Aux(name.to_string()),
    })
}

fn build_pred(e: &SExpr) -> Result<Predicate> {
    if let SExpr::Atom(a) = e {
        if a == "true" {
            return Ok(Predicate::True);
        }
        return Err(err(format!("unknown predicate '{a}'")));
    }
    let items = as_list(e, "predicate")?;
    let op = head(items)?;
    let args = &items[1..];
    match op {
        "and" | "or" => {
            let [a, b] = args else {
                return Err(err(format!("{op} takes two predicates")));
            };
            let (a, b) = (build_pred(a)?, build_pred(b)?);
            Ok(if op == "and" { a.and(b) } else { a.or(b) })
        }
        "not" => {
            let [a] = args else {
                return Err(err("not takes one predicate"));
            };
            Ok(build_pred(a)?.negate())
        }
        "in" => match args {
            [SExpr::Atom(field), values] if field == "term" => {
                Ok(Predicate::atom(Atom::TermIn(string_list(values)?)))
            }
            [SExpr::Atom(field), values] if field == "ts" => Ok(Predicate::atom(Atom::TsIn(
                as_list(values, "interval")?
                    .iter()
                    .map(|v| as_i64(v, "interval"))
                    .collect::<Result<_>>()?,
            ))),
            [SExpr::Atom(field), values] if field == "doc" => Ok(Predicate::atom(Atom::DocIn(
                as_list(values, "doc id")?
                    .iter()
                    .map(|v| as_u64(v, "doc id").map(DocId))
                    .collect::<Result<_>>()?,
            ))),
            [SExpr::Atom(field), SExpr::Atom(name), values] if field == "aux" => Ok(
                Predicate::atom(Atom::AuxIn(name.clone(), string_list(values)?)),
            ),
            _ => Err(err("in takes a field and a value list")),
        },
        "ts-range" => {
            let [lo, hi] = args else {
                return Err(err("ts-range takes two intervals"));
            };
            let (lo, hi) = (as_i64(lo, "interval")?, as_i64(hi, "interval")?);
            Ok(Predicate::atom(Atom::TsCmp(CmpOp::Ge, lo))
                .and(Predicate::atom(Atom::TsCmp(CmpOp::Le, hi))))
        }
        "date-range" => {
            let [lo, hi] = args else {
                return Err(err("date-range takes two dates"));
            };
            Ok(Predicate::atom(Atom::DateRange(
                as_date(lo, "date")?,
                as_date(hi, "date")?,
            )))
        }
        "doc-range" => {
            let [lo, hi] = args else {
                return Err(err("doc-range takes two doc ids"));
            };
            Ok(Predicate::atom(Atom::DocRange(
                DocId(as_u64(lo, "doc id")?),
                DocId(as_u64(hi, "doc id")?),
            )))
        }
        cmp @ ("=" | "!=" | "<" | "<=" | ">" | ">=") => {
            let op = match cmp {
                "=" => CmpOp::Eq,
                "!=" => CmpOp::Ne,
                "<" => CmpOp::Lt,
                "<=" => CmpOp::Le,
                ">" => CmpOp::Gt,
                _ => CmpOp::Ge,
            };
            match args {
                [SExpr::Atom(field), value] if field == "term" && op == CmpOp::Eq => {
                    Ok(Predicate::atom(Atom::TermEq(as_atom(value, "term")?)))
                }
                [SExpr::Atom(field), value] if field == "ts" => {
                    Ok(Predicate::atom(Atom::TsCmp(op, as_i64(value, "interval")?)))
                }
                [SExpr::Atom(field), value] if field == "date" => {
                    Ok(Predicate::atom(Atom::DateCmp(op, as_date(value, "date")?)))
                }
                [SExpr::Atom(field), value] if field == "count" => {
                    Ok(Predicate::atom(Atom::CountCmp(op, as_u64(value, "count")?)))
                }
                [SExpr::Atom(field), SExpr::Atom(name), value]
                    if field == "aux" && op == CmpOp::Eq =>
                {
                    Ok(Predicate::atom(Atom::AuxEq(
                        name.clone(),
                        as_atom(value, "aux value")?,
                    )))
                }
                _ => Err(err(format!("malformed comparison '{cmp}'"))),
            }
        }
        other => Err(err(format!("unknown predicate operator '{other}'"))),
    }
}

fn string_list(e: &SExpr) -> Result<Vec<String>> {
    as_list(e, "value")?
        .iter()
        .map(|v| as_atom(v, "value"))
        .collect()
}

// --- printer ---

/// Print an expression in the canonical textual form accepted by
/// [`parse_plan`].
pub fn print_plan(expr: &PlanExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn write_expr(expr: &PlanExpr, out: &mut String) {
    match expr {
        PlanExpr::Source(name) => {
            out.push_str(&format!("(source {name})"));
        }
        PlanExpr::DocList(docs) => {
            out.push_str("(docs");
            for d in docs {
                out.push_str(&format!(" {d}"));
            }
            out.push(')');
        }
        PlanExpr::Select { pred, input } => {
            out.push_str("(select ");
            write_pred(pred, out);
            out.push(' ');
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Project { attrs, distinct, input } => {
            out.push_str("(project (");
            out.push_str(
                &attrs
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push(')');
            if *distinct {
                out.push_str(" distinct");
            }
            out.push(' ');
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Coarsen { width_days, start, end, input } => {
            out.push_str(&format!("(coarsen {width_days}"));
            if start.is_some() || end.is_some() {
                out.push_str(&format!(
                    " (window {} {})",
                    start.map_or("*".to_string(), |d| d.to_string()),
                    end.map_or("*".to_string(), |d| d.to_string())
                ));
            }
            out.push(' ');
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Merge { left, right } => {
            out.push_str("(merge ");
            write_expr(left, out);
            out.push(' ');
            write_expr(right, out);
            out.push(')');
        }
        PlanExpr::Group { vars, input } => {
            out.push_str(&format!("(group ({}) ", vars.join(" ")));
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Apply { func, params, input } | PlanExpr::ApplyArg { func, params, input } => {
            let name = if matches!(expr, PlanExpr::Apply { .. }) {
                "apply"
            } else {
                "applyarg"
            };
            let params = params
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!("({name} {func} ({params}) "));
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::SortByAxis { axis, descending, input } => {
            let axis = match axis {
                SortAxis::Term => "term",
                SortAxis::Count => "count",
            };
            let order = if *descending { "desc" } else { "asc" };
            out.push_str(&format!("(sort {axis} {order} "));
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Top { k, input } => {
            out.push_str(&format!("(top {k} "));
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Collapse { axis, input } => {
            out.push_str(&format!("(collapse {} ", axis_name(*axis)));
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::Distance { metric, left, right } => {
            out.push_str(&format!("(distance {metric} "));
            write_expr(left, out);
            out.push(' ');
            write_expr(right, out);
            out.push(')');
        }
        PlanExpr::IndexOp { op, left, right } => {
            let name = match op {
                SetOp::Union => "union",
                SetOp::Intersect => "intersect",
                SetOp::Difference => "difference",
            };
            out.push_str(&format!("(indexop {name} "));
            write_expr(left, out);
            out.push(' ');
            write_expr(right, out);
            out.push(')');
        }
        PlanExpr::QueryIndex { docs, start, end, input } => {
            out.push_str("(queryindex (docs");
            for d in docs {
                out.push_str(&format!(" {d}"));
            }
            out.push(')');
            if start.is_some() || end.is_some() {
                out.push_str(&format!(
                    " (window {} {})",
                    start.map_or("*".to_string(), |d| d.to_string()),
                    end.map_or("*".to_string(), |d| d.to_string())
                ));
            }
            out.push(' ');
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::ExtractAxis { axis, input } => {
            out.push_str(&format!("(extractaxis {} ", axis_name(*axis)));
            write_expr(input, out);
            out.push(')');
        }
        PlanExpr::GetRecords { keys, input } => {
            out.push_str("(getrecords (");
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("({} {}", quote(&key.term), key.interval));
                for a in &key.aux {
                    out.push(' ');
                    out.push_str(&quote(a));
                }
                out.push(')');
            }
            out.push_str(") ");
            write_expr(input, out);
            out.push(')');
        }
    }
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::Term => "term",
        Axis::Ts => "ts",
    }
}

fn write_pred(pred: &Predicate, out: &mut String) {
    match pred {
        Predicate::True => out.push_str("true"),
        Predicate::And(a, b) => {
            out.push_str("(and ");
            write_pred(a, out);
            out.push(' ');
            write_pred(b, out);
            out.push(')');
        }
        Predicate::Or(a, b) => {
            out.push_str("(or ");
            write_pred(a, out);
            out.push(' ');
            write_pred(b, out);
            out.push(')');
        }
        Predicate::Not(p) => {
            out.push_str("(not ");
            write_pred(p, out);
            out.push(')');
        }
        Predicate::Atom(atom) => write_atom(atom, out),
    }
}

fn write_atom(atom: &Atom, out: &mut String) {
    match atom {
        Atom::TermEq(t) => out.push_str(&format!("(= term {})", quote(t))),
        Atom::TermIn(ts) => {
            let vals = ts.iter().map(|t| quote(t)).collect::<Vec<_>>().join(" ");
            out.push_str(&format!("(in term ({vals}))"));
        }
        Atom::TsCmp(op, v) => out.push_str(&format!("({} ts {v})", op.symbol())),
        Atom::TsIn(vs) => {
            let vals = vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            out.push_str(&format!("(in ts ({vals}))"));
        }
        Atom::DateCmp(op, d) => out.push_str(&format!("({} date {d})", op.symbol())),
        Atom::DateRange(lo, hi) => out.push_str(&format!("(date-range {lo} {hi})")),
        Atom::CountCmp(op, v) => out.push_str(&format!("({} count {v})", op.symbol())),
        Atom::DocIn(ds) => {
            let vals = ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
            out.push_str(&format!("(in doc ({vals}))"));
        }
        Atom::DocRange(lo, hi) => out.push_str(&format!("(doc-range {lo} {hi})")),
        Atom::AuxEq(name, v) => out.push_str(&format!("(= aux {name} {})", quote(v))),
        Atom::AuxIn(name, vs) => {
            let vals = vs.iter().map(|v| quote(v)).collect::<Vec<_>>().join(" ");
            out.push_str(&format!("(in aux {name} ({vals}))"));
        }
    }
}
