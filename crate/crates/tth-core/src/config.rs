//! Mapping configuration: which record fields carry the document id, the
//! timestamp, the indexed text, and the discrete category attributes, plus
//! the time-grid setup.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Result, TthError};
use crate::grid::{parse_iso_date, TimeGrid};
use crate::tokenize::Tokenizer;

pub const DEFAULT_TEMPORAL_FORMAT: &str = "%Y-%m-%d";

/// Declares how corpus records map onto the document model.
#[derive(Debug, Clone)]
pub struct MappingConfig {
    /// Corpus name, used for output naming.
    pub corpus: String,
    /// Record field holding the externally supplied integer document id.
    pub id_field: String,
    /// Record field holding the document timestamp.
    pub temporal_field: String,
    /// chrono format string for parsing the temporal field.
    pub temporal_format: String,
    /// Text fields to index.
    pub term_index: Vec<String>,
    /// Discrete auxiliary attributes.
    pub categories: Vec<String>,
    /// Terms dropped by the tokenizer.
    pub stopwords: BTreeSet<String>,
    /// Multi-word phrases emitted as single terms.
    pub phrases: Vec<String>,
    /// Origin of the time grid; documents before it are rejected.
    pub grid_origin: NaiveDate,
    /// Grid interval width in whole days.
    pub grid_width_days: i64,
}

#[derive(Deserialize)]
struct RawConfig {
    corpus: String,
    id_field: String,
    temporal_field: String,
    temporal_format: Option<String>,
    term_index: Vec<String>,
    #[serde(default)]
    categories: Vec<String>,
    stopwords_path: Option<String>,
    phrases_path: Option<String>,
    grid_origin: String,
    grid_width_days: Option<i64>,
}

impl MappingConfig {
    /// Parse a TOML config. `base_dir`, when given, anchors the relative
    /// stopword and phrase file paths.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| TthError::Parse(format!("invalid mapping config: {e}")))?;
        let stopwords = match &raw.stopwords_path {
            Some(p) => read_word_list(&resolve(base_dir, p))?.into_iter().collect(),
            None => BTreeSet::new(),
        };
        let phrases = match &raw.phrases_path {
            Some(p) => read_word_list(&resolve(base_dir, p))?,
            None => Vec::new(),
        };
        let config = MappingConfig {
            corpus: raw.corpus,
            id_field: raw.id_field,
            temporal_field: raw.temporal_field,
            temporal_format: raw
                .temporal_format
                .unwrap_or_else(|| DEFAULT_TEMPORAL_FORMAT.to_string()),
            term_index: raw.term_index,
            categories: raw.categories,
            stopwords,
            phrases,
            grid_origin: parse_iso_date(&raw.grid_origin)?,
            grid_width_days: raw.grid_width_days.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_width_days < 1 {
            return Err(TthError::Argument(format!(
                "grid_width_days must be positive, got {}",
                self.grid_width_days
            )));
        }
        let mut seen = BTreeSet::new();
        let all = std::iter::once(&self.id_field)
            .chain(std::iter::once(&self.temporal_field))
            .chain(self.term_index.iter())
            .chain(self.categories.iter());
        for name in all {
            if name.is_empty() {
                return Err(TthError::Schema("field names must be non-empty".into()));
            }
            if name.contains(',') || name.contains(';') || name.contains('\n') {
                return Err(TthError::Schema(format!(
                    "field name '{name}' contains a reserved separator character"
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(TthError::Schema(format!(
                    "field name '{name}' is declared more than once"
                )));
            }
        }
        if self.term_index.is_empty() {
            return Err(TthError::Schema(
                "at least one term_index field is required".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid_origin, self.grid_width_days)
    }

    pub fn tokenizer(&self) -> Tokenizer {
        Tokenizer::new(self.stopwords.iter().cloned(), self.phrases.iter().cloned())
    }
}

fn resolve(base: Option<&Path>, p: &str) -> std::path::PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.map(|b| b.join(path)).unwrap_or_else(|| path.to_path_buf())
    }
}

fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| TthError::Parse(format!("cannot read word list {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
        corpus = "fig1"
        id_field = "id"
        temporal_field = "date"
        term_index = ["text"]
        categories = ["city"]
        grid_origin = "2017-01-01"
        grid_width_days = 1
    "#;

    #[test]
    fn parses_minimal_config() {
        let c = MappingConfig::from_toml_str(SAMPLE, None).unwrap();
        assert_eq!(c.corpus, "fig1");
        assert_eq!(c.temporal_format, DEFAULT_TEMPORAL_FORMAT);
        assert_eq!(c.grid_width_days, 1);
        assert_eq!(c.categories, vec!["city"]);
    }

    #[test]
    fn rejects_duplicate_field_names() {
        let bad = SAMPLE.replace("categories = [\"city\"]", "categories = [\"id\"]");
        assert!(matches!(
            MappingConfig::from_toml_str(&bad, None),
            Err(TthError::Schema(_))
        ));
    }

    #[test]
    fn rejects_bad_width() {
        let bad = SAMPLE.replace("grid_width_days = 1", "grid_width_days = 0");
        assert!(MappingConfig::from_toml_str(&bad, None).is_err());
    }

    #[test]
    fn rejects_missing_term_index() {
        let bad = SAMPLE.replace("term_index = [\"text\"]", "term_index = []");
        assert!(matches!(
            MappingConfig::from_toml_str(&bad, None),
            Err(TthError::Schema(_))
        ));
    }

    #[test]
    fn loads_stopword_and_phrase_lists_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("stop.txt"), "the\n# comment\nof\n\n").unwrap();
        std::fs::write(dir.path().join("phrases.txt"), "tax cut\n").unwrap();
        let with_lists = format!(
            "{SAMPLE}\nstopwords_path = \"stop.txt\"\nphrases_path = \"phrases.txt\"\n"
        );
        let c = MappingConfig::from_toml_str(&with_lists, Some(dir.path())).unwrap();
        assert!(c.stopwords.contains("the"));
        assert!(c.stopwords.contains("of"));
        assert_eq!(c.stopwords.len(), 2);
        assert_eq!(c.phrases, vec!["tax cut"]);

        let tokens = c.tokenizer().tokenize("the Tax Cut of 2017");
        assert_eq!(tokens, vec!["tax cut", "2017"]);
    }
}
