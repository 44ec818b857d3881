//! Corpus loading: newline-delimited JSON or CSV records parsed into
//! time-stamped documents under a mapping configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use crate::config::MappingConfig;
use crate::error::{Result, TthError};
use crate::grid::{Interval, TimeGrid};

/// Externally supplied integer document id, unique within a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId(pub u64);

impl std::fmt::Display for DocId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One flat input record: field name to raw string value.
pub type Record = BTreeMap<String, String>;

/// A parsed document: id, date (grid resolution), indexed text fields, and
/// auxiliary category values.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: DocId,
    pub date: NaiveDate,
    /// Interval index on the corpus base grid.
    pub interval: Interval,
    /// Raw text per declared term-index field.
    pub fields: BTreeMap<String, String>,
    /// Value per declared category attribute.
    pub aux: BTreeMap<String, String>,
}

/// A loaded corpus: documents plus the grid and configuration they were
/// parsed under. Immutable after loading.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub config: MappingConfig,
    pub grid: TimeGrid,
    pub docs: Vec<Document>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Parse a stream of records into a corpus. Nothing is rejected silently:
/// a missing field, an unparseable timestamp, a pre-origin date, or a
/// duplicate id aborts the load with an error naming the record.
pub fn load_corpus<I>(config: &MappingConfig, source: I) -> Result<Corpus>
where
    I: IntoIterator<Item = Result<Record>>,
{
    config.validate()?;
    let grid = config.grid()?;
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();

    for (idx, record) in source.into_iter().enumerate() {
        let record = record?;
        let nth = idx + 1;
        let doc = parse_record(config, &grid, &record, nth)?;
        if !seen.insert(doc.id) {
            return Err(TthError::Conflict(format!(
                "record {nth}: duplicate document id {}",
                doc.id
            )));
        }
        docs.push(doc);
    }
    Ok(Corpus {
        config: config.clone(),
        grid,
        docs,
    })
}

fn parse_record(
    config: &MappingConfig,
    grid: &TimeGrid,
    record: &Record,
    nth: usize,
) -> Result<Document> {
    let field = |name: &str| -> Result<&String> {
        record.get(name).ok_or_else(|| {
            TthError::Schema(format!("record {nth}: missing field '{name}'"))
        })
    };

    let id_raw = field(&config.id_field)?;
    let id: u64 = id_raw.trim().parse().map_err(|_| {
        TthError::Parse(format!(
            "record {nth}: document id '{id_raw}' is not an integer"
        ))
    })?;

    let ts_raw = field(&config.temporal_field)?;
    let date = parse_timestamp(ts_raw, &config.temporal_format).map_err(|e| {
        TthError::Parse(format!("record {nth} (id {id}): {e}"))
    })?;
    let interval = grid.interval_of(date).map_err(|_| {
        TthError::Range(format!(
            "record {nth} (id {id}): date {date} precedes grid origin {}",
            grid.origin()
        ))
    })?;

    let mut fields = BTreeMap::new();
    for name in &config.term_index {
        fields.insert(name.clone(), field(name)?.clone());
    }
    let mut aux = BTreeMap::new();
    for name in &config.categories {
        aux.insert(name.clone(), field(name)?.clone());
    }

    Ok(Document {
        id: DocId(id),
        date,
        interval,
        fields,
        aux,
    })
}

fn parse_timestamp(raw: &str, format: &str) -> std::result::Result<NaiveDate, String> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, format) {
        return Ok(d);
    }
    match NaiveDateTime::parse_from_str(raw, format) {
        Ok(dt) => Ok(dt.date()),
        Err(e) => Err(format!("timestamp '{raw}' does not match format '{format}': {e}")),
    }
}

/// Records from a newline-delimited JSON reader, one object per line. Scalar
/// values are flattened to strings; null and absent behave as missing.
pub fn jsonl_records<R: Read>(reader: R) -> impl Iterator<Item = Result<Record>> {
    BufReader::new(reader)
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| {
            let nth = idx + 1;
            match line {
                Err(e) => Some(Err(TthError::Io(e))),
                Ok(l) if l.trim().is_empty() => None,
                Ok(l) => Some(parse_json_line(&l, nth)),
            }
        })
}

fn parse_json_line(line: &str, nth: usize) -> Result<Record> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| TthError::Parse(format!("line {nth}: invalid JSON record: {e}")))?;
    let obj = value.as_object().ok_or_else(|| {
        TthError::Parse(format!("line {nth}: expected a JSON object"))
    })?;
    let mut record = Record::new();
    for (k, v) in obj {
        let s = match v {
            serde_json::Value::Null => continue,
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            other => {
                return Err(TthError::Parse(format!(
                    "line {nth}: field '{k}' has non-scalar value {other}"
                )))
            }
        };
        record.insert(k.clone(), s);
    }
    Ok(record)
}

/// Records from CSV input with a header row.
pub fn csv_records<R: Read>(reader: R) -> impl Iterator<Item = Result<Record>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map(|h| h.iter().map(str::to_string).collect::<Vec<_>>())
        .map_err(|e| TthError::Parse(format!("invalid CSV header: {e}")));
    let mut out: Vec<Result<Record>> = Vec::new();
    match headers {
        Err(e) => out.push(Err(e)),
        Ok(headers) => {
            for (idx, row) in rdr.records().enumerate() {
                let nth = idx + 1;
                match row {
                    Err(e) => {
                        out.push(Err(TthError::Parse(format!("row {nth}: invalid CSV: {e}"))))
                    }
                    Ok(row) => {
                        let record = headers
                            .iter()
                            .zip(row.iter())
                            .map(|(h, v)| (h.clone(), v.to_string()))
                            .collect();
                        out.push(Ok(record));
                    }
                }
            }
        }
    }
    out.into_iter()
}

/// Open `path` and pick the reader from its extension: `.csv` for CSV,
/// anything else is treated as newline-delimited JSON.
pub fn records_from_path(path: &Path) -> Result<Box<dyn Iterator<Item = Result<Record>>>> {
    let file = File::open(path)
        .map_err(|e| TthError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    if is_csv {
        Ok(Box::new(csv_records(file)))
    } else {
        Ok(Box::new(jsonl_records(file)))
    }
}
