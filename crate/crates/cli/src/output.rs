use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{Map, Value};

use crate::config::Format;

pub const SCHEMA: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            // `+ 0.0` folds −0 into 0
            Cell::F(v) => format!("{:e}", v + 0.0),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text))?;
        }
        w.into_inner().context("flushing CSV")
    }

    /// Rows as JSON objects keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (k, c) in self.header.iter().zip(r) {
                        let v = match c {
                            Cell::F(v) => json_f64(*v),
                            Cell::I(v) => Value::from(*v),
                            Cell::S(s) => Value::from(s.clone()),
                        };
                        m.insert((*k).to_string(), v);
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// Non-finite numbers become `null`.
pub fn json_f64(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

/// A command's result: a JSON document and, when it has one, a table for CSV.
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
}

impl Report {
    /// Starts a document with the schema tag and command name.
    pub fn document(command: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema".into(), Value::from(SCHEMA));
        m.insert("command".into(), Value::from(command));
        m
    }
}

pub fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)?;
            s.flush()?;
            Ok(())
        }
    }
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    let bytes = match format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&report.json)?;
            b.push(b'\n');
            b
        }
        Format::Csv => match &report.table {
            Some(t) => t.to_csv()?,
            None => bail!("this command has no CSV output"),
        },
    };
    write_bytes(out, &bytes)
}
