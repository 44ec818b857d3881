//! Tabular output: every evaluation result renders to a delimited table,
//! and per-series plot data is emitted as two-column (x, y) CSV files.

use std::io::Write;
use std::path::Path;

use tth_core::algebra::{Axis, MarginalKey};
use tth_core::plan::Value;
use tth_core::vocab::Vocabulary;
use tth_core::{Result, Tth, TthError, TthRow};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Table {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(writer);
        w.write_record(&self.columns)
            .map_err(|e| TthError::Parse(format!("table write failed: {e}")))?;
        for row in &self.rows {
            w.write_record(row)
                .map_err(|e| TthError::Parse(format!("table write failed: {e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self, delimiter: u8) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(&mut buf, delimiter)?;
        Ok(buf)
    }
}

pub fn delimiter_for(format: &str) -> Result<u8> {
    match format {
        "csv" => Ok(b','),
        "tsv" => Ok(b'\t'),
        other => Err(TthError::Argument(format!(
            "unknown output format '{other}' (expected csv or tsv)"
        ))),
    }
}

fn docs_cell(docs: &[tth_core::DocId]) -> String {
    docs.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn row_cells(tth_row: &TthRow, tth: &Tth) -> Vec<String> {
    let mut cells = vec![
        tth.vocab().term(tth_row.term).unwrap_or("<unknown>").to_string(),
        tth.interval_start(tth_row.interval).to_string(),
        tth_row.count.to_string(),
        docs_cell(&tth_row.docs),
    ];
    cells.extend(tth_row.aux.iter().cloned());
    cells
}

/// Render a histogram as the snapshot-style row table.
pub fn tth_table(tth: &Tth) -> Table {
    let mut columns = vec![
        "term".to_string(),
        "start".to_string(),
        "count".to_string(),
        "docs".to_string(),
    ];
    columns.extend(tth.aux_schema().iter().cloned());
    let mut table = Table::new(columns);
    for row in tth.rows() {
        table.push(row_cells(&row, tth));
    }
    table
}

fn rows_table(rows: &[TthRow], vocab: &Vocabulary) -> Table {
    let aux_width = rows.iter().map(|r| r.aux.len()).max().unwrap_or(0);
    let mut columns = vec![
        "term".to_string(),
        "ts".to_string(),
        "count".to_string(),
        "docs".to_string(),
    ];
    for i in 0..aux_width {
        columns.push(format!("aux{}", i + 1));
    }
    let mut table = Table::new(columns);
    for row in rows {
        let mut cells = vec![
            vocab.term(row.term).unwrap_or("<unknown>").to_string(),
            row.interval.to_string(),
            row.count.to_string(),
            docs_cell(&row.docs),
        ];
        for i in 0..aux_width {
            cells.push(row.aux.get(i).cloned().unwrap_or_default());
        }
        table.push(cells);
    }
    table
}

/// Render any plan evaluation result. Grouped values flatten into a leading
/// `group` column.
pub fn value_table(value: &Value) -> Table {
    match value {
        Value::Tth(tth) => tth_table(tth),
        Value::Rows(view) => rows_table(&view.rows, &view.vocab),
        Value::Bindings(b) => {
            let mut table = Table::new(b.columns.clone());
            for row in &b.rows {
                table.push(row.iter().map(|v| v.to_string()).collect());
            }
            table
        }
        Value::Marginal(mv) => {
            let axis = match mv.marginal.axis {
                Axis::Term => "term",
                Axis::Ts => "ts",
            };
            let mut table = Table::new(vec![axis.to_string(), "count".into(), "docs".into()]);
            for row in &mv.marginal.rows {
                let key = match row.key {
                    MarginalKey::Term(id) => {
                        mv.vocab.term(id).unwrap_or("<unknown>").to_string()
                    }
                    MarginalKey::Ts(i) => i.to_string(),
                };
                table.push(vec![key, row.count.to_string(), docs_cell(&row.docs)]);
            }
            table
        }
        Value::Values(vv) => {
            let mut table = Table::new(vec!["value", "rows"]);
            for v in &vv.values {
                let rows = v
                    .rows
                    .iter()
                    .map(|k| {
                        let term = vv.vocab.term(k.term).unwrap_or("<unknown>");
                        if k.aux.is_empty() {
                            format!("({term},{})", k.interval)
                        } else {
                            format!("({term},{},{})", k.interval, k.aux.join("/"))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(";");
                table.push(vec![v.value.to_string(), rows]);
            }
            table
        }
        Value::DocList(docs) => {
            let mut table = Table::new(vec!["doc"]);
            for d in docs {
                table.push(vec![d.to_string()]);
            }
            table
        }
        Value::Pairs(pv) => {
            let mut table = Table::new(vec!["term", "ts"]);
            for (term, interval) in &pv.pairs {
                table.push(vec![
                    pv.vocab.term(*term).unwrap_or("<unknown>").to_string(),
                    interval.to_string(),
                ]);
            }
            table
        }
        Value::Num(n) => {
            let mut table = Table::new(vec!["value"]);
            table.push(vec![n.to_string()]);
            table
        }
        Value::Grouped(parts) => {
            let mut inner_columns: Option<Vec<String>> = None;
            let mut rows = Vec::new();
            for (key, value) in parts {
                let t = value_table(value);
                if inner_columns.is_none() {
                    inner_columns = Some(t.columns.clone());
                }
                for row in t.rows {
                    let mut cells = vec![key.join("/")];
                    cells.extend(row);
                    rows.push(cells);
                }
            }
            let mut columns = vec!["group".to_string()];
            columns.extend(inner_columns.unwrap_or_default());
            let mut table = Table::new(columns);
            for row in rows {
                table.push(row);
            }
            table
        }
    }
}

/// One plot series: a name plus (x, y) points.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(String, String)>,
}

/// Write series as `<report>_<series>.csv` files under `dir`.
pub fn write_plot_series(dir: &Path, report: &str, series: &[PlotSeries]) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in series {
        let safe: String = s
            .name
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let file = format!("{report}_{safe}.csv");
        let mut table = Table::new(vec!["x", "y"]);
        for (x, y) in &s.points {
            table.push(vec![x.clone(), y.clone()]);
        }
        std::fs::write(dir.join(&file), table.to_bytes(b',')?)?;
        written.push(file);
    }
    Ok(written)
}
