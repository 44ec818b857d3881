//! Vocabulary: a bijection between term strings and dense integer ids.

use std::collections::HashMap;

use crate::error::{Result, TthError};

/// Identifier of a term in a [`Vocabulary`]. Ids are dense and start at 0 in
/// first-appearance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(pub u32);

impl std::fmt::Display for TermId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Default, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, TermId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id of `term`, if present.
    pub fn lookup(&self, term: &str) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    /// Id of `term`, or a lookup error naming it.
    pub fn require(&self, term: &str) -> Result<TermId> {
        self.lookup(term)
            .ok_or_else(|| TthError::Lookup(format!("term '{term}' is not in the vocabulary")))
    }

    /// Term string for `id`, if in range.
    pub fn term(&self, id: TermId) -> Option<&str> {
        self.terms.get(id.0 as usize).map(String::as_str)
    }

    /// Term string for `id`, or a lookup error.
    pub fn require_term(&self, id: TermId) -> Result<&str> {
        self.term(id)
            .ok_or_else(|| TthError::Lookup(format!("term id {id} is out of range")))
    }

    /// Id of `term`, inserting it if unseen.
    pub fn intern(&mut self, term: &str) -> TermId {
        if let Some(id) = self.ids.get(term) {
            return *id;
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(term.to_string());
        self.ids.insert(term.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains_id(&self, id: TermId) -> bool {
        (id.0 as usize) < self.terms.len()
    }

    /// All (id, term) pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (TermId, &str)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| (TermId(i as u32), t.as_str()))
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Vocabulary {}
