use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::{CliError, CliResult};

/// One CSV cell. Floats carry the number of decimals used in pretty mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64, usize),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(value: Option<f64>, decimals: usize) -> Self {
        value.map_or(Cell::Empty, |v| Cell::Float(v, decimals))
    }

    fn render(&self, pretty: bool) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v, d) if pretty => format!("{v:.d$}", d = *d),
            Cell::Float(v, _) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v, _) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W, pretty: bool) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(pretty)))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let object: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(name, cell)| (name.to_string(), cell.to_json()))
                        .collect();
                    Value::Object(object)
                })
                .collect(),
        )
    }
}

/// A command result: a CSV table and, optionally, a richer JSON document.
pub struct Report {
    pub table: Table,
    pub json: Option<Value>,
}

impl Report {
    pub fn table(table: Table) -> Self {
        Self { table, json: None }
    }
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>, pretty: bool) -> CliResult<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => report.table.write_csv(&mut sink, pretty)?,
        Format::Json => {
            let value = report.json.clone().unwrap_or_else(|| report.table.to_json());
            if pretty {
                serde_json::to_writer_pretty(&mut sink, &value).map_err(io::Error::from)?;
            } else {
                serde_json::to_writer(&mut sink, &value).map_err(io::Error::from)?;
            }
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}
