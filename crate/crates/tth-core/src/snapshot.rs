//! Histogram snapshot files.
//!
//! Layout (CSV records): one header record `origin, width_days, field,
//! aux-name...`, then one record per stored row: `term, interval start date,
//! count, comma-separated doc ids, aux values...`. Range-binned histograms
//! insert a `#ranges` record after the header listing `start/end` pairs.
//! Rows are written in canonical key order, so save -> load -> save is
//! byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDate;

use crate::corpus::DocId;
use crate::error::{Result, TthError};
use crate::grid::{parse_iso_date, TimeGrid};
use crate::index::TermDocFrequency;
use crate::tth::{Binning, RowData, RowKey, Tth};
use crate::vocab::Vocabulary;

const RANGES_MARKER: &str = "#ranges";

pub fn save<W: Write>(tth: &Tth, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let mut header = vec![
        tth.grid().origin().to_string(),
        tth.grid().width_days().to_string(),
        tth.field().to_string(),
    ];
    header.extend(tth.aux_schema().iter().cloned());
    w.write_record(&header)
        .map_err(|e| TthError::Parse(format!("snapshot write failed: {e}")))?;

    if let Binning::Ranges(ranges) = tth.bins() {
        let mut record = vec![RANGES_MARKER.to_string()];
        record.extend(ranges.iter().map(|(s, e)| format!("{s}/{e}")));
        w.write_record(&record)
            .map_err(|e| TthError::Parse(format!("snapshot write failed: {e}")))?;
    }

    for (key, data) in tth.iter() {
        let term = tth.vocab().require_term(key.term)?;
        let docs: Vec<String> = data.docs.iter().map(|d| d.to_string()).collect();
        let mut record = vec![
            term.to_string(),
            tth.interval_start(key.interval).to_string(),
            data.count.to_string(),
            docs.join(","),
        ];
        record.extend(key.aux.iter().cloned());
        w.write_record(&record)
            .map_err(|e| TthError::Parse(format!("snapshot write failed: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_path(tth: &Tth, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    save(tth, BufWriter::new(file))
}

pub fn save_to_string(tth: &Tth) -> Result<String> {
    let mut buf = Vec::new();
    save(tth, &mut buf)?;
    String::from_utf8(buf).map_err(|e| TthError::Parse(format!("snapshot is not UTF-8: {e}")))
}

/// Load a snapshot with a private vocabulary built from its terms. The
/// forward index is not part of a snapshot; attach one separately when
/// deduplicating merges is needed.
pub fn load<R: Read>(reader: R) -> Result<Tth> {
    let mut shared = Vocabulary::new();
    let mut loaded = load_with(reader, &mut shared, "<snapshot>")?;
    loaded.vocab = Arc::new(shared);
    Ok(loaded)
}

pub fn load_path(path: &Path) -> Result<Tth> {
    let file = File::open(path)
        .map_err(|e| TthError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    load(file)
}

/// Load several snapshots against one shared vocabulary so the resulting
/// histograms can be merged and compared. `base` seeds the shared ids (pass
/// the ingest vocabulary to keep corpus term ids).
pub fn load_all_with_base(
    paths: &[&Path],
    base: &Vocabulary,
    forward: Option<Arc<TermDocFrequency>>,
) -> Result<Vec<Tth>> {
    let mut shared = base.clone();
    let mut loaded = Vec::with_capacity(paths.len());
    for path in paths {
        let file = File::open(path).map_err(|e| {
            TthError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        loaded.push(load_with(file, &mut shared, &path.display().to_string())?);
    }
    let vocab = Arc::new(shared);
    for tth in &mut loaded {
        tth.vocab = Arc::clone(&vocab);
        tth.forward = forward.clone();
    }
    Ok(loaded)
}

/// Load several snapshots against a fresh shared vocabulary.
pub fn load_all(paths: &[&Path]) -> Result<Vec<Tth>> {
    load_all_with_base(paths, &Vocabulary::new(), None)
}

fn load_with<R: Read>(reader: R, vocab: &mut Vocabulary, origin_name: &str) -> Result<Tth> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = records
        .next()
        .ok_or_else(|| TthError::Parse(format!("{origin_name}: empty snapshot")))?
        .map_err(|e| TthError::Parse(format!("{origin_name}: bad header: {e}")))?;
    if header.len() < 3 {
        return Err(TthError::Parse(format!(
            "{origin_name}: header needs origin, width, and field"
        )));
    }
    let origin = parse_iso_date(&header[0])?;
    let width: i64 = header[1]
        .parse()
        .map_err(|_| TthError::Parse(format!("{origin_name}: bad width '{}'", &header[1])))?;
    let grid = TimeGrid::new(origin, width)?;
    let field = header[2].to_string();
    let aux_schema: Vec<String> = header.iter().skip(3).map(str::to_string).collect();

    let mut bins = Binning::Uniform;
    let mut rows: BTreeMap<RowKey, RowData> = BTreeMap::new();
    for (idx, record) in records.enumerate() {
        let nth = idx + 1;
        let record =
            record.map_err(|e| TthError::Parse(format!("{origin_name} row {nth}: {e}")))?;
        if record.get(0) == Some(RANGES_MARKER) {
            let ranges: Vec<(NaiveDate, NaiveDate)> = record
                .iter()
                .skip(1)
                .map(|pair| {
                    let (s, e) = pair.split_once('/').ok_or_else(|| {
                        TthError::Parse(format!("{origin_name}: bad range '{pair}'"))
                    })?;
                    Ok((parse_iso_date(s)?, parse_iso_date(e)?))
                })
                .collect::<Result<_>>()?;
            bins = Binning::Ranges(ranges);
            continue;
        }
        if record.len() < 4 + aux_schema.len() {
            return Err(TthError::Parse(format!(
                "{origin_name} row {nth}: expected {} fields, got {}",
                4 + aux_schema.len(),
                record.len()
            )));
        }
        let term = vocab.intern(&record[0]);
        let date = parse_iso_date(&record[1])?;
        let days = date.signed_duration_since(origin).num_days();
        if days < 0 || days % width != 0 {
            return Err(TthError::Parse(format!(
                "{origin_name} row {nth}: date {date} is not on the grid"
            )));
        }
        let interval = days / width;
        let count: u64 = record[2]
            .parse()
            .map_err(|_| TthError::Parse(format!("{origin_name} row {nth}: bad count")))?;
        let docs: Vec<DocId> = if record[3].is_empty() {
            Vec::new()
        } else {
            record[3]
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map(DocId)
                        .map_err(|_| {
                            TthError::Parse(format!(
                                "{origin_name} row {nth}: bad doc id '{s}'"
                            ))
                        })
                })
                .collect::<Result<_>>()?
        };
        if docs.is_empty() || count < docs.len() as u64 {
            return Err(TthError::Parse(format!(
                "{origin_name} row {nth}: stored rows require count >= |docs| >= 1"
            )));
        }
        if docs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TthError::Parse(format!(
                "{origin_name} row {nth}: doc ids must be sorted and duplicate-free"
            )));
        }
        let aux: Vec<String> = record.iter().skip(4).map(str::to_string).collect();
        let key = RowKey::new(term, interval, aux);
        if rows.insert(key, RowData { count, docs }).is_some() {
            return Err(TthError::Conflict(format!(
                "{origin_name} row {nth}: duplicate row key"
            )));
        }
    }

    Ok(Tth {
        grid,
        bins,
        field,
        aux_schema,
        rows,
        vocab: Arc::new(Vocabulary::new()), // replaced by the caller
        forward: None,
    })
}
