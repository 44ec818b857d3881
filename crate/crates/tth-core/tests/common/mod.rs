//! Shared helpers for the integration suites: random corpora, independent
//! brute-force oracles over the raw documents, random plan generation, and a
//! least-squares fit for the scaling checks.
//!
//! The oracles deliberately avoid the library's aggregation code paths: they
//! re-tally token occurrences straight from the generated token lists.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tth_core::algebra::{Atom, CmpOp, Predicate};
use tth_core::plan::PlanExpr;
use tth_core::{
    build_indexes, build_tth, load_corpus, BuildFilter, Corpus, DocId, FieldIndex, MappingConfig,
    Record, TermId, Tth, TthRow, Vocabulary,
};

pub fn origin() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 1, 1).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Raw generated document, kept next to the parsed corpus so oracles can
/// recount from the token lists.
#[derive(Debug, Clone)]
pub struct OracleDoc {
    pub id: u64,
    pub interval: i64,
    pub tokens: Vec<String>,
    pub aux: BTreeMap<String, String>,
}

pub struct TestCorpus {
    pub corpus: Corpus,
    pub index: FieldIndex,
    pub docs: Vec<OracleDoc>,
}

const TERM_POOL: [&str; 20] = [
    "alder", "birch", "cedar", "dogwood", "elm", "fir", "ginkgo", "hazel", "ironwood", "juniper",
    "katsura", "larch", "maple", "nutmeg", "oak", "pine", "quince", "rowan", "spruce", "teak",
];

const AUX_DOMAINS: [(&str, &[&str]); 2] = [
    ("city", &["NY", "LA", "SF"]),
    ("paper", &["P1", "P2"]),
];

/// Random corpus within the oracle-suite bounds: up to `max_docs` documents,
/// `max_terms` distinct terms, `max_intervals` daily intervals, and
/// `max_aux` category attributes.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    max_docs: usize,
    max_terms: usize,
    max_intervals: usize,
    max_aux: usize,
) -> TestCorpus {
    let num_docs = rng.random_range(0..=max_docs);
    let num_terms = rng.random_range(1..=max_terms.min(TERM_POOL.len()));
    let num_intervals = rng.random_range(1..=max_intervals);
    let num_aux = rng.random_range(0..=max_aux.min(AUX_DOMAINS.len()));

    let mut docs = Vec::with_capacity(num_docs);
    for i in 0..num_docs {
        let interval = rng.random_range(0..num_intervals) as i64;
        let len = rng.random_range(0..=12);
        let tokens: Vec<String> = (0..len)
            .map(|_| TERM_POOL[rng.random_range(0..num_terms)].to_string())
            .collect();
        let aux: BTreeMap<String, String> = AUX_DOMAINS[..num_aux]
            .iter()
            .map(|(name, domain)| {
                (
                    name.to_string(),
                    domain[rng.random_range(0..domain.len())].to_string(),
                )
            })
            .collect();
        docs.push(OracleDoc {
            id: i as u64 + 1,
            interval,
            tokens,
            aux,
        });
    }
    build_test_corpus(docs, num_aux)
}

pub fn build_test_corpus(docs: Vec<OracleDoc>, num_aux: usize) -> TestCorpus {
    let categories: Vec<String> = AUX_DOMAINS[..num_aux]
        .iter()
        .map(|(name, _)| name.to_string())
        .collect();
    let config = MappingConfig {
        corpus: "random".into(),
        id_field: "id".into(),
        temporal_field: "date".into(),
        temporal_format: "%Y-%m-%d".into(),
        term_index: vec!["text".into()],
        categories,
        stopwords: Default::default(),
        phrases: Vec::new(),
        grid_origin: origin(),
        grid_width_days: 1,
    };
    let records: Vec<tth_core::Result<Record>> = docs
        .iter()
        .map(|d| {
            let mut r = Record::new();
            r.insert("id".into(), d.id.to_string());
            r.insert(
                "date".into(),
                (origin() + Duration::days(d.interval)).to_string(),
            );
            r.insert("text".into(), d.tokens.join(" "));
            for (k, v) in &d.aux {
                r.insert(k.clone(), v.clone());
            }
            Ok(r)
        })
        .collect();
    let corpus = load_corpus(&config, records).expect("generated corpus loads");
    let index = build_indexes(&corpus, "text").expect("indexes build");
    TestCorpus { corpus, index, docs }
}

impl TestCorpus {
    pub fn build(&self, width: i64, filter: &BuildFilter, aux_schema: &[String]) -> Tth {
        build_tth(&self.corpus, &self.index, width, filter, aux_schema).expect("build_tth")
    }
}

/// Rows keyed the way `Tth::rows_by_term_string` reports them.
pub type OracleRows = BTreeMap<(String, i64, Vec<String>), (u64, Vec<DocId>)>;

/// Tallying accumulator: doc sets are deduplicated while counting.
type OracleAcc = BTreeMap<(String, i64, Vec<String>), (u64, BTreeSet<DocId>)>;

fn doc_passes(doc: &OracleDoc, filter: &BuildFilter) -> bool {
    let date = origin() + Duration::days(doc.interval);
    if let Some(start) = filter.date_start {
        if date < start {
            return false;
        }
    }
    if let Some(end) = filter.date_end {
        if date >= end {
            return false;
        }
    }
    for (name, value) in &filter.aux_equals {
        if doc.aux.get(name) != Some(value) {
            return false;
        }
    }
    for (term, min) in &filter.min_term_count {
        let occurrences = doc.tokens.iter().filter(|t| *t == term).count() as u64;
        if occurrences < *min {
            return false;
        }
    }
    true
}

/// Brute-force recount over the raw documents: tally
/// (term, coarse interval, aux projection) for every document passing any of
/// the filters.
pub fn oracle_build_multi(
    docs: &[OracleDoc],
    filters: &[&BuildFilter],
    width: i64,
    aux_schema: &[String],
) -> OracleRows {
    let mut acc: OracleAcc = BTreeMap::new();
    for doc in docs {
        if !filters.iter().any(|f| doc_passes(doc, f)) {
            continue;
        }
        let coarse = doc.interval / width;
        let aux: Vec<String> = aux_schema
            .iter()
            .map(|name| doc.aux.get(name).cloned().unwrap_or_default())
            .collect();
        for token in &doc.tokens {
            let entry = acc
                .entry((token.clone(), coarse, aux.clone()))
                .or_insert((0, BTreeSet::new()));
            entry.0 += 1;
            entry.1.insert(DocId(doc.id));
        }
    }
    acc.into_iter()
        .map(|(k, (count, docs))| (k, (count, docs.into_iter().collect())))
        .collect()
}

pub fn oracle_build(
    docs: &[OracleDoc],
    filter: &BuildFilter,
    width: i64,
    aux_schema: &[String],
) -> OracleRows {
    oracle_build_multi(docs, &[filter], width, aux_schema)
}

pub fn assert_matches_oracle(tth: &Tth, oracle: &OracleRows, context: &str) {
    let got = tth.rows_by_term_string();
    assert_eq!(&got, oracle, "mismatch against brute-force recount: {context}");
}

/// Random build filter over the corpus bounds.
pub fn random_filter(rng: &mut ChaCha8Rng, num_aux: usize) -> BuildFilter {
    let mut filter = BuildFilter::default();
    if rng.random_bool(0.3) {
        let start = rng.random_range(0..6);
        filter.date_start = Some(origin() + Duration::days(start));
        if rng.random_bool(0.5) {
            filter.date_end = Some(origin() + Duration::days(start + rng.random_range(1..6)));
        }
    }
    if num_aux > 0 && rng.random_bool(0.4) {
        let (name, domain) = AUX_DOMAINS[rng.random_range(0..num_aux)];
        filter
            .aux_equals
            .push((name.to_string(), domain[rng.random_range(0..domain.len())].to_string()));
    }
    if rng.random_bool(0.4) {
        let term = TERM_POOL[rng.random_range(0..TERM_POOL.len())].to_string();
        filter.min_term_count.push((term, rng.random_range(1..3)));
    }
    filter
}

/// Random predicate paired with an equivalent independent evaluator over
/// oracle rows.
pub enum OraclePred {
    TermEq(String),
    TsCmp(CmpOp, i64),
    CountCmp(CmpOp, u64),
    AuxEq(String, String),
    And(Box<OraclePred>, Box<OraclePred>),
    Or(Box<OraclePred>, Box<OraclePred>),
    Not(Box<OraclePred>),
}

impl OraclePred {
    pub fn to_predicate(&self) -> Predicate {
        match self {
            OraclePred::TermEq(t) => Predicate::atom(Atom::TermEq(t.clone())),
            OraclePred::TsCmp(op, v) => Predicate::atom(Atom::TsCmp(*op, *v)),
            OraclePred::CountCmp(op, v) => Predicate::atom(Atom::CountCmp(*op, *v)),
            OraclePred::AuxEq(name, v) => Predicate::atom(Atom::AuxEq(name.clone(), v.clone())),
            OraclePred::And(a, b) => a.to_predicate().and(b.to_predicate()),
            OraclePred::Or(a, b) => a.to_predicate().or(b.to_predicate()),
            OraclePred::Not(a) => a.to_predicate().negate(),
        }
    }

    /// Independent row check: `aux_schema` gives the meaning of positions in
    /// the oracle key's aux vector.
    pub fn eval(
        &self,
        key: &(String, i64, Vec<String>),
        count: u64,
        aux_schema: &[String],
    ) -> bool {
        match self {
            OraclePred::TermEq(t) => key.0 == *t,
            OraclePred::TsCmp(op, v) => cmp_holds(*op, key.1, *v),
            OraclePred::CountCmp(op, v) => cmp_holds(*op, count, *v),
            OraclePred::AuxEq(name, v) => aux_schema
                .iter()
                .position(|a| a == name)
                .is_some_and(|p| key.2.get(p) == Some(v)),
            OraclePred::And(a, b) => {
                a.eval(key, count, aux_schema) && b.eval(key, count, aux_schema)
            }
            OraclePred::Or(a, b) => {
                a.eval(key, count, aux_schema) || b.eval(key, count, aux_schema)
            }
            OraclePred::Not(a) => !a.eval(key, count, aux_schema),
        }
    }
}

fn cmp_holds<T: PartialOrd>(op: CmpOp, l: T, r: T) -> bool {
    match op {
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Gt => l > r,
        CmpOp::Ge => l >= r,
    }
}

pub fn random_oracle_pred(rng: &mut ChaCha8Rng, aux_schema: &[String], depth: usize) -> OraclePred {
    let cmps = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    if depth > 0 && rng.random_bool(0.4) {
        let a = Box::new(random_oracle_pred(rng, aux_schema, depth - 1));
        let b = Box::new(random_oracle_pred(rng, aux_schema, depth - 1));
        return match rng.random_range(0..3) {
            0 => OraclePred::And(a, b),
            1 => OraclePred::Or(a, b),
            _ => OraclePred::Not(a),
        };
    }
    let with_aux = !aux_schema.is_empty();
    match rng.random_range(0..if with_aux { 4 } else { 3 }) {
        0 => OraclePred::TermEq(TERM_POOL[rng.random_range(0..TERM_POOL.len())].to_string()),
        1 => OraclePred::TsCmp(cmps[rng.random_range(0..cmps.len())], rng.random_range(0..10)),
        2 => OraclePred::CountCmp(cmps[rng.random_range(0..cmps.len())], rng.random_range(0..5)),
        _ => {
            let name = &aux_schema[rng.random_range(0..aux_schema.len())];
            let domain = AUX_DOMAINS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, d)| *d)
                .unwrap();
            OraclePred::AuxEq(
                name.clone(),
                domain[rng.random_range(0..domain.len())].to_string(),
            )
        }
    }
}

/// Apply an oracle predicate to oracle rows (independent select).
pub fn oracle_select(rows: &OracleRows, pred: &OraclePred, aux_schema: &[String]) -> OracleRows {
    rows.iter()
        .filter(|(key, (count, _))| pred.eval(key, *count, aux_schema))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// Re-bin oracle rows onto a coarser width (counts summed, docs unioned).
pub fn oracle_coarsen(rows: &OracleRows, ratio: i64) -> OracleRows {
    let mut acc: OracleAcc = BTreeMap::new();
    for ((term, interval, aux), (count, docs)) in rows {
        let entry = acc
            .entry((term.clone(), interval.div_euclid(ratio), aux.clone()))
            .or_insert((0, BTreeSet::new()));
        entry.0 += count;
        entry.1.extend(docs.iter().copied());
    }
    acc.into_iter()
        .map(|(k, (c, d))| (k, (c, d.into_iter().collect())))
        .collect()
}

// --- synthetic histograms for plan-quality and scaling checks ---

/// Dense synthetic histogram: `terms x intervals` rows of count 1, each with
/// a distinct single-document list starting at `doc_base`.
pub fn synthetic_tth(terms: usize, intervals: usize, doc_base: u64, vocab: &Arc<Vocabulary>) -> Tth {
    let grid = tth_core::TimeGrid::new(origin(), 1).unwrap();
    let rows = (0..terms).flat_map(|t| {
        (0..intervals).map(move |i| TthRow {
            term: TermId(t as u32),
            interval: i as i64,
            count: 1,
            docs: vec![DocId(doc_base + (t * intervals + i) as u64)],
            aux: Vec::new(),
        })
    });
    Tth::from_rows(grid, "text", Vec::new(), Arc::clone(vocab), None, rows).unwrap()
}

pub fn synthetic_vocab(terms: usize) -> Arc<Vocabulary> {
    let mut vocab = Vocabulary::new();
    for t in 0..terms {
        vocab.intern(&format!("s{t}"));
    }
    Arc::new(vocab)
}

// --- random well-typed plans ---

/// Random plan over the named sources (all bound to same-grid histograms of
/// base width 1 day). The generated tree keeps coarsen widths multiplicative
/// so evaluation always succeeds; rewriting must preserve the result.
pub fn random_plan(rng: &mut ChaCha8Rng, sources: &[String], depth: usize) -> PlanExpr {
    let top_width = [1, 2, 3, 4, 6][rng.random_range(0..5)];
    let tth = random_tth_expr(rng, sources, depth, top_width);
    match rng.random_range(0..8) {
        0 => PlanExpr::Project {
            attrs: vec![tth_core::algebra::Attr::Term, tth_core::algebra::Attr::Count],
            distinct: rng.random_bool(0.5),
            input: Box::new(tth),
        },
        1 => PlanExpr::Collapse {
            axis: if rng.random_bool(0.5) {
                tth_core::algebra::Axis::Term
            } else {
                tth_core::algebra::Axis::Ts
            },
            input: Box::new(tth),
        },
        2 => PlanExpr::Apply {
            func: ["sum", "max", "mean"][rng.random_range(0..3)].to_string(),
            params: Vec::new(),
            input: Box::new(tth),
        },
        3 => PlanExpr::Top {
            k: rng.random_range(1..6),
            input: Box::new(PlanExpr::SortByAxis {
                axis: tth_core::algebra::SortAxis::Count,
                descending: true,
                input: Box::new(tth),
            }),
        },
        4 => PlanExpr::ExtractAxis {
            axis: if rng.random_bool(0.5) {
                tth_core::algebra::Axis::Term
            } else {
                tth_core::algebra::Axis::Ts
            },
            input: Box::new(tth),
        },
        5 => {
            let mut docs: Vec<u64> = (0..rng.random_range(0..6)).map(|_| rng.random_range(1..60)).collect();
            docs.sort_unstable();
            docs.dedup();
            PlanExpr::QueryIndex {
                docs: docs.into_iter().map(DocId).collect(),
                start: None,
                end: None,
                input: Box::new(tth),
            }
        }
        _ => tth,
    }
}

fn random_tth_expr(
    rng: &mut ChaCha8Rng,
    sources: &[String],
    depth: usize,
    width: i64,
) -> PlanExpr {
    if depth == 0 {
        return leaf(rng, sources, width);
    }
    match rng.random_range(0..10) {
        0..=2 => {
            // Coarsen from a finer width that divides this one.
            let divisors: Vec<i64> = (1..=width).filter(|d| width % d == 0).collect();
            let inner_width = divisors[rng.random_range(0..divisors.len())];
            if inner_width == width && rng.random_bool(0.5) {
                leaf(rng, sources, width)
            } else {
                PlanExpr::Coarsen {
                    width_days: width,
                    start: None,
                    end: None,
                    input: Box::new(random_tth_expr(rng, sources, depth - 1, inner_width)),
                }
            }
        }
        3..=5 => PlanExpr::Merge {
            left: Box::new(random_tth_expr(rng, sources, depth - 1, width)),
            right: Box::new(random_tth_expr(rng, sources, depth - 1, width)),
        },
        6..=7 => {
            let pred = random_oracle_pred(rng, &[], 1).to_predicate();
            PlanExpr::Select {
                pred,
                input: Box::new(random_tth_expr(rng, sources, depth - 1, width)),
            }
        }
        _ => leaf(rng, sources, width),
    }
}

/// A leaf producing the requested width: a bare source at base width, or a
/// source coarsened up to `width`.
fn leaf(rng: &mut ChaCha8Rng, sources: &[String], width: i64) -> PlanExpr {
    let source = PlanExpr::Source(sources[rng.random_range(0..sources.len())].clone());
    if width == 1 {
        source
    } else {
        PlanExpr::Coarsen {
            width_days: width,
            start: None,
            end: None,
            input: Box::new(source),
        }
    }
}

// --- least squares for scaling checks ---

/// Fit `y = a + b x`, returning (a, b, r_squared, max relative residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let b = sxy / sxx;
    let a = mean_y - b * mean_x;

    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let p = a + b * x;
            (y - p) * (y - p)
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    let max_rel = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let p = a + b * x;
            ((y - p) / p).abs()
        })
        .fold(0.0f64, f64::max);
    (a, b, r2, max_rel)
}
