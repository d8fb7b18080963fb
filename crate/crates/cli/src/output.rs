// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Tables, provenance preamble and the CSV / JSON writers.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde_json::{json, Map, Value};

/// Literal written instead of a number for samples past the divergence cap.
pub const DIVERGED: &str = "diverged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Non-finite values are written as [`DIVERGED`].
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Diverged,
    /// No value, e.g. correlations of an unstable point.
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    /// Fixed 17-significant-digit scientific notation; round-trips every f64.
    pub fn format_float(x: f64) -> String {
        format!("{x:.16e}")
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => Self::format_float(*x),
            Cell::Num(_) | Cell::Diverged => DIVERGED.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Diverged => json!(DIVERGED),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric values of one column, `None` for non-numeric cells.
    pub fn numbers(&self, name: &str) -> Vec<Option<f64>> {
        let k = self.column(name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }
}

/// Ordered `key: value` lines written ahead of the data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.into(), value.into()));
        self
    }

    fn with_stamp(&self, timestamp: &str) -> Vec<(String, String)> {
        let mut e = vec![(
            "generator".to_string(),
            format!("gainloss {}", env!("CARGO_PKG_VERSION")),
        )];
        e.extend(self.entries.iter().cloned());
        e.push(("timestamp".to_string(), timestamp.to_string()));
        e
    }
}

pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn write_table<W: Write>(
    out: W,
    table: &Table,
    prov: &Provenance,
    format: Format,
    timestamp: &str,
) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, table, prov, timestamp),
        Format::Json => write_json(out, table, prov, timestamp),
    }
}

fn write_csv<W: Write>(mut out: W, table: &Table, prov: &Provenance, timestamp: &str) -> io::Result<()> {
    for (k, v) in prov.with_stamp(timestamp) {
        // Keep the preamble one line per entry whatever the value holds.
        writeln!(out, "# {k}: {}", v.replace('\n', " "))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv))?;
    }
    w.flush()
}

fn write_json<W: Write>(mut out: W, table: &Table, prov: &Provenance, timestamp: &str) -> io::Result<()> {
    let mut meta = Map::new();
    for (k, v) in prov.with_stamp(timestamp) {
        meta.insert(k, Value::String(v));
    }
    meta.insert("columns".into(), json!(table.columns));
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(r)
                .map(|(c, v)| (c.to_string(), v.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({ "metadata": Value::Object(meta), "rows": rows });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)
}
