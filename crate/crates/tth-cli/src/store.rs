//! On-disk layout of an ingested corpus: metadata, document table,
//! per-field vocabulary and forward index. Files are written sorted so
//! repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use tth_core::corpus::Document;
use tth_core::{
    Corpus, DocId, DocumentHistogram, FieldIndex, MappingConfig, Result, TermDocFrequency,
    TermId, TthError, Vocabulary,
};

pub const META_FILE: &str = "meta.json";
pub const DOCS_FILE: &str = "docs.csv";

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub corpus: String,
    pub grid_origin: String,
    pub grid_width_days: i64,
    pub fields: Vec<String>,
    pub categories: Vec<String>,
    pub num_docs: usize,
    pub terms_per_field: BTreeMap<String, usize>,
}

fn vocab_file(field: &str) -> String {
    format!("vocab_{field}.txt")
}

fn forward_file(field: &str) -> String {
    format!("forward_{field}.csv")
}

/// Write the ingested corpus and its per-field indexes, plus any extra
/// `(name, bytes)` files, in one pass. On failure every file written by this
/// call is removed.
pub fn save_ingest(
    out: &Path,
    corpus: &Corpus,
    indexes: &[FieldIndex],
    extra_files: Vec<(String, Vec<u8>)>,
) -> Result<CorpusMeta> {
    fs::create_dir_all(out)?;
    let meta = CorpusMeta {
        corpus: corpus.config.corpus.clone(),
        grid_origin: corpus.grid.origin().to_string(),
        grid_width_days: corpus.grid.width_days(),
        fields: indexes.iter().map(|i| i.field.clone()).collect(),
        categories: corpus.config.categories.clone(),
        num_docs: corpus.docs.len(),
        terms_per_field: indexes
            .iter()
            .map(|i| (i.field.clone(), i.vocab.len()))
            .collect(),
    };

    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    files.push((
        out.join(META_FILE),
        serde_json::to_vec_pretty(&meta)
            .map_err(|e| TthError::Parse(format!("meta encoding failed: {e}")))?,
    ));

    let mut docs_csv = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut docs_csv);
        let mut header = vec!["id".to_string(), "date".to_string()];
        header.extend(corpus.config.categories.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for doc in &corpus.docs {
            let mut record = vec![doc.id.to_string(), doc.date.to_string()];
            for cat in &corpus.config.categories {
                record.push(doc.aux.get(cat).cloned().unwrap_or_default());
            }
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
    }
    files.push((out.join(DOCS_FILE), docs_csv));

    for index in indexes {
        let mut vocab_txt = String::new();
        for (_, term) in index.vocab.iter() {
            vocab_txt.push_str(term);
            vocab_txt.push('\n');
        }
        files.push((out.join(vocab_file(&index.field)), vocab_txt.into_bytes()));

        let mut fwd_csv = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut fwd_csv);
            w.write_record(["term_id", "doc_id", "count"]).map_err(csv_err)?;
            for (term, doc, count) in index.forward.iter() {
                w.write_record([term.to_string(), doc.to_string(), count.to_string()])
                    .map_err(csv_err)?;
            }
            w.flush()?;
        }
        files.push((out.join(forward_file(&index.field)), fwd_csv));
    }
    for (name, bytes) in extra_files {
        files.push((out.join(name), bytes));
    }

    let mut written = Vec::new();
    for (path, bytes) in files {
        match fs::write(&path, bytes) {
            Ok(()) => written.push(path),
            Err(e) => {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(TthError::Io(e));
            }
        }
    }
    Ok(meta)
}

fn csv_err(e: csv::Error) -> TthError {
    TthError::Parse(format!("csv write failed: {e}"))
}

/// Reload an ingested corpus directory: the documents (without raw text)
/// plus the index of the requested field.
pub fn load_ingest(out: &Path, field: Option<&str>) -> Result<(Corpus, FieldIndex)> {
    let meta = load_meta(out)?;
    let field = match field {
        Some(f) => {
            if !meta.fields.iter().any(|x| x == f) {
                return Err(TthError::Schema(format!(
                    "field '{f}' was not ingested (available: {})",
                    meta.fields.join(", ")
                )));
            }
            f.to_string()
        }
        None => meta
            .fields
            .first()
            .cloned()
            .ok_or_else(|| TthError::Schema("ingest directory lists no fields".into()))?,
    };

    let config = MappingConfig {
        corpus: meta.corpus.clone(),
        id_field: "id".into(),
        temporal_field: "date".into(),
        temporal_format: "%Y-%m-%d".into(),
        term_index: meta.fields.clone(),
        categories: meta.categories.clone(),
        stopwords: Default::default(),
        phrases: Vec::new(),
        grid_origin: chrono::NaiveDate::parse_from_str(&meta.grid_origin, "%Y-%m-%d")
            .map_err(|e| TthError::Parse(format!("bad grid origin in meta: {e}")))?,
        grid_width_days: meta.grid_width_days,
    };
    let grid = config.grid()?;

    // Documents.
    let docs_path = out.join(DOCS_FILE);
    let mut rdr = csv::Reader::from_path(&docs_path)
        .map_err(|e| TthError::Parse(format!("{}: {e}", docs_path.display())))?;
    let mut docs = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| TthError::Parse(format!("docs.csv row {}: {e}", idx + 1)))?;
        let id: u64 = row[0]
            .parse()
            .map_err(|_| TthError::Parse(format!("docs.csv row {}: bad id", idx + 1)))?;
        let date = chrono::NaiveDate::parse_from_str(&row[1], "%Y-%m-%d")
            .map_err(|e| TthError::Parse(format!("docs.csv row {}: {e}", idx + 1)))?;
        let aux: BTreeMap<String, String> = meta
            .categories
            .iter()
            .enumerate()
            .map(|(i, cat)| (cat.clone(), row.get(i + 2).unwrap_or("").to_string()))
            .collect();
        docs.push(Document {
            id: DocId(id),
            date,
            interval: grid.interval_of(date)?,
            fields: BTreeMap::new(),
            aux,
        });
    }

    // Vocabulary.
    let vocab_path = out.join(vocab_file(&field));
    let vocab_text = fs::read_to_string(&vocab_path)
        .map_err(|e| TthError::Parse(format!("{}: {e}", vocab_path.display())))?;
    let mut vocab = Vocabulary::new();
    for term in vocab_text.lines() {
        vocab.intern(term);
    }
    let vocab = Arc::new(vocab);

    // Forward index, regrouped into per-document histograms.
    let fwd_path = out.join(forward_file(&field));
    let mut rdr = csv::Reader::from_path(&fwd_path)
        .map_err(|e| TthError::Parse(format!("{}: {e}", fwd_path.display())))?;
    let mut forward = TermDocFrequency::new();
    let mut per_doc: BTreeMap<DocId, Vec<(TermId, u64)>> = BTreeMap::new();
    for (idx, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| TthError::Parse(format!("forward row {}: {e}", idx + 1)))?;
        let term = TermId(
            row[0]
                .parse()
                .map_err(|_| TthError::Parse(format!("forward row {}: bad term id", idx + 1)))?,
        );
        let doc = DocId(
            row[1]
                .parse()
                .map_err(|_| TthError::Parse(format!("forward row {}: bad doc id", idx + 1)))?,
        );
        let count: u64 = row[2]
            .parse()
            .map_err(|_| TthError::Parse(format!("forward row {}: bad count", idx + 1)))?;
        forward.insert(term, doc, count);
        per_doc.entry(doc).or_default().push((term, count));
    }

    let doc_hists: Vec<DocumentHistogram> = docs
        .iter()
        .map(|doc| DocumentHistogram {
            doc_id: doc.id,
            interval: doc.interval,
            rows: per_doc.remove(&doc.id).unwrap_or_default(),
        })
        .collect();

    let corpus = Corpus {
        config,
        grid,
        docs,
    };
    Ok((
        corpus,
        FieldIndex {
            field,
            vocab,
            doc_hists,
            forward: Arc::new(forward),
        },
    ))
}

pub fn load_meta(out: &Path) -> Result<CorpusMeta> {
    let meta_path = out.join(META_FILE);
    let text = fs::read_to_string(&meta_path).map_err(|e| {
        TthError::Schema(format!(
            "{} is not an ingest directory: {e}",
            out.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| TthError::Parse(format!("{}: {e}", meta_path.display())))
}
