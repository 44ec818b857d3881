//! Deterministic tokenizer: lowercase, split on non-alphanumeric runs,
//! optional stopword removal, optional multi-word phrases matched greedily
//! before splitting.

use std::collections::BTreeSet;

/// Tokenizer configured with a stopword set and a phrase list.
///
/// Phrases are matched greedily (longest first) against the lowercased text
/// at token boundaries; a matched phrase is emitted as a single term and the
/// scan continues after it. Everything else is split on non-alphanumeric
/// runs. Stopwords are dropped from the split tokens; phrase terms are kept
/// verbatim.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
    phrases: Vec<String>,
}

impl Tokenizer {
    pub fn new<S, P>(stopwords: S, phrases: P) -> Self
    where
        S: IntoIterator<Item = String>,
        P: IntoIterator<Item = String>,
    {
        let stopwords = stopwords
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect::<BTreeSet<_>>();
        let mut phrases: Vec<String> = phrases
            .into_iter()
            .map(|p| p.to_lowercase())
            .filter(|p| !p.is_empty())
            .collect();
        // Longest first so the greedy match prefers the most specific phrase.
        phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        phrases.dedup();
        Tokenizer { stopwords, phrases }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lower = text.to_lowercase();
        let mut out = Vec::new();
        let mut token_start: Option<usize> = None;
        let mut pos = 0usize;

        while pos < lower.len() {
            if token_start.is_none() {
                if let Some(phrase) = self.phrase_at(&lower, pos) {
                    out.push(phrase.to_string());
                    pos += phrase.len();
                    continue;
                }
            }
            // Safe: pos always sits on a char boundary here.
            let ch = lower[pos..].chars().next().unwrap();
            if ch.is_alphanumeric() {
                if token_start.is_none() {
                    token_start = Some(pos);
                }
            } else if let Some(start) = token_start.take() {
                self.push_token(&lower[start..pos], &mut out);
            }
            pos += ch.len_utf8();
        }
        if let Some(start) = token_start {
            self.push_token(&lower[start..], &mut out);
        }
        out
    }

    fn push_token(&self, tok: &str, out: &mut Vec<String>) {
        if !tok.is_empty() && !self.stopwords.contains(tok) {
            out.push(tok.to_string());
        }
    }

    /// A phrase matching literally at `pos`, bounded by non-alphanumeric
    /// context on both sides.
    fn phrase_at<'a>(&'a self, text: &str, pos: usize) -> Option<&'a str> {
        if self.phrases.is_empty() {
            return None;
        }
        let before_ok = text[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        if !before_ok {
            return None;
        }
        for phrase in &self.phrases {
            let end = pos + phrase.len();
            if text.get(pos..end) == Some(phrase.as_str()) {
                let after_ok = text[end..]
                    .chars()
                    .next()
                    .is_none_or(|c| !c.is_alphanumeric());
                if after_ok {
                    return Some(phrase);
                }
            }
        }
        None
    }
}
