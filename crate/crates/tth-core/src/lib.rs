//! # tth-core
//!
//! Temporal term histograms over time-stamped document corpora.
//!
//! A temporal term histogram is a sparse table of
//! `(term, time interval, occurrence count, contributing document ids,
//! auxiliary category values)` rows built from a tokenized corpus. This
//! crate provides:
//!
//! - corpus ingestion under a mapping configuration ([`config`],
//!   [`corpus`], [`index`]),
//! - histogram construction with build predicates and snapshot persistence
//!   ([`tth`], [`snapshot`]),
//! - the operator algebra: select, project, coarsen, merge, group, apply,
//!   sorting, collapse, index operations, and distances ([`algebra`]),
//! - query plans with algebraic rewriting and cost estimates ([`plan`]),
//! - analytical recipes: topic co-occurrence, salience testing via the
//!   Mann-Whitney U test, trendy-term detection, synchronized topics, and
//!   per-interval TF-IDF ([`analytics`]),
//! - a seeded synthetic corpus generator for benchmarks and end-to-end
//!   checks ([`gen`]).
//!
//! All histogram values are immutable; operators are pure functions, so
//! results may be shared and evaluated concurrently without coordination.

pub mod algebra;
pub mod analytics;
pub mod config;
pub mod corpus;
pub mod error;
pub mod gen;
pub mod grid;
pub mod index;
pub mod plan;
pub mod snapshot;
pub mod tokenize;
pub mod tth;
pub mod vocab;

pub use config::MappingConfig;
pub use corpus::{load_corpus, Corpus, DocId, Document, Record};
pub use error::{Result, TthError};
pub use grid::{Interval, TimeGrid};
pub use index::{build_indexes, DocumentHistogram, FieldIndex, TermDocFrequency};
pub use tokenize::Tokenizer;
pub use tth::{build_tth, Binning, BuildFilter, RowData, RowKey, Tth, TthRow};
pub use vocab::{TermId, Vocabulary};
