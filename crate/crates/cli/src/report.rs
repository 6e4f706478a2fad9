use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Failure, Format};

pub const TOOL: &str = "freespace-lab";

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub arithmetic_mode: String,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(command: &str, config: Value, arithmetic_mode: &str, result: T) -> Self {
        Envelope {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            arithmetic_mode: arithmetic_mode.to_string(),
            result,
        }
    }
}

/// Tabular view of a result for `--format csv`.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn render_csv(table: &Table) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let bad = |e: csv::Error| Failure::Input(format!("cannot write csv: {e}"));
    w.write_record(&table.headers).map_err(bad)?;
    for row in &table.rows {
        w.write_record(row).map_err(bad)?;
    }
    w.into_inner().map_err(|e| Failure::Input(format!("cannot write csv: {e}")))
}

pub fn render_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    bytes
}

pub fn emit<T: Serialize>(value: &T, table: &Table, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = match format {
        Format::Json => render_json(value),
        Format::Csv => render_csv(table)?,
    };
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::Input(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).and_then(|()| stdout.flush()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}
