//! Per-field corpus indexes: the vocabulary, one histogram per document, and
//! the (term, document) forward frequency table.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::corpus::{Corpus, DocId};
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::vocab::{TermId, Vocabulary};

/// Per-document term counts: the document's histogram rows, sorted by term id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentHistogram {
    pub doc_id: DocId,
    /// Interval of the document on the corpus base grid.
    pub interval: Interval,
    /// (term, count) rows; term ids unique, counts >= 1.
    pub rows: Vec<(TermId, u64)>,
}

impl DocumentHistogram {
    /// Total token occurrences of indexed terms in the document.
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c).sum()
    }
}

/// Forward index: occurrence count per (term, document). Needed to answer
/// per-document frequency queries and to deduplicate overlapping merges.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct TermDocFrequency {
    counts: BTreeMap<(TermId, DocId), u64>,
}

impl TermDocFrequency {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: TermId, doc: DocId, count: u64) {
        self.counts.insert((term, doc), count);
    }

    /// Count of `term` in `doc`; 0 when the pair is absent.
    pub fn count(&self, term: TermId, doc: DocId) -> u64 {
        self.counts.get(&(term, doc)).copied().unwrap_or(0)
    }

    pub fn get(&self, term: TermId, doc: DocId) -> Option<u64> {
        self.counts.get(&(term, doc)).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, DocId, u64)> + '_ {
        self.counts.iter().map(|(&(t, d), &c)| (t, d, c))
    }
}

/// Indexes for one term-index field of a corpus. Immutable once built; safe
/// to share across threads behind the contained `Arc`s.
#[derive(Debug, Clone)]
pub struct FieldIndex {
    pub field: String,
    pub vocab: Arc<Vocabulary>,
    pub doc_hists: Vec<DocumentHistogram>,
    pub forward: Arc<TermDocFrequency>,
}

impl FieldIndex {
    /// Histogram of a document by id.
    pub fn hist_of(&self, doc: DocId) -> Option<&DocumentHistogram> {
        // Built in corpus order; ids are not necessarily sorted, so scan the
        // index map lazily on small corpora would do, but a map is simpler.
        self.doc_hists.iter().find(|h| h.doc_id == doc)
    }
}

/// Tokenize every document's `field` text and build the vocabulary, the
/// per-document histograms, and the forward frequency table.
pub fn build_indexes(corpus: &Corpus, field: &str) -> Result<FieldIndex> {
    if !corpus.config.term_index.iter().any(|f| f == field) {
        return Err(TthError::Schema(format!(
            "'{field}' is not a declared term_index field"
        )));
    }
    let tokenizer = corpus.config.tokenizer();
    let mut vocab = Vocabulary::new();
    let mut doc_hists = Vec::with_capacity(corpus.docs.len());
    let mut forward = TermDocFrequency::new();

    for doc in &corpus.docs {
        let text = doc.fields.get(field).map(String::as_str).unwrap_or("");
        let mut counts: BTreeMap<TermId, u64> = BTreeMap::new();
        for token in tokenizer.tokenize(text) {
            *counts.entry(vocab.intern(&token)).or_insert(0) += 1;
        }
        for (&term, &count) in &counts {
            forward.insert(term, doc.id, count);
        }
        doc_hists.push(DocumentHistogram {
            doc_id: doc.id,
            interval: doc.interval,
            rows: counts.into_iter().collect(),
        });
    }

    Ok(FieldIndex {
        field: field.to_string(),
        vocab: Arc::new(vocab),
        doc_hists,
        forward: Arc::new(forward),
    })
}
