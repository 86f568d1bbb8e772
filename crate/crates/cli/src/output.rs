use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self::from_header(header.iter().map(|s| s.to_string()).collect())
    }

    pub fn from_header(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Report {
    /// Process exit code for a completed run (0 or 1; 2 for unaccepted numerics).
    pub code: i32,
    pub json: Value,
    pub table: Table,
}

fn render(report: &Report, config: &RunConfig) -> Result<Vec<u8>, CliError> {
    let io_err = |e: &dyn std::fmt::Display| CliError::Io(e.to_string());
    match config.format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&report.json).map_err(|e| io_err(&e))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut bytes = Vec::new();
            let cfg = serde_json::to_string(config).map_err(|e| io_err(&e))?;
            writeln!(bytes, "# config={cfg}").map_err(|e| io_err(&e))?;
            let mut w = csv::Writer::from_writer(bytes);
            w.write_record(&report.table.header).map_err(|e| io_err(&e))?;
            for row in &report.table.rows {
                w.write_record(row).map_err(|e| io_err(&e))?;
            }
            w.into_inner().map_err(|e| io_err(&e))
        }
    }
}

/// Writes to `--out` (via a temporary sibling, so failures leave no file) or stdout.
pub fn emit(report: &Report, config: &RunConfig) -> Result<(), CliError> {
    let bytes = render(report, config)?;
    match &config.out {
        Some(path) => write_atomic(path, &bytes),
        None => io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, bytes)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
