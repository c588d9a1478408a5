use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows for `--format csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a subcommand produced. `failures` name the checks that did not hold.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(json: impl Serialize) -> Result<Self, CliError> {
        Ok(Self { json: serde_json::to_value(json)?, table: None, failures: Vec::new() })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    args: &'a [String],
    version: &'static str,
    format: &'static str,
    output: String,
    sha256: String,
    wall_ms: u64,
    exit_code: i32,
}

pub fn render(report: &Report, format: Format, command: &str) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&report.json)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let table = report.table.as_ref().ok_or_else(|| CliError::Usage(format!("--format csv: `{command}` has no tabular output")))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.into_error()))
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub struct Emit<'a> {
    pub command: &'a str,
    pub args: &'a [String],
    pub format: Format,
    pub out: Option<&'a Path>,
    pub wall_ms: u64,
    pub exit_code: i32,
}

/// Writes the output to `--out` with its manifest sidecar, or to stdout.
pub fn emit(bytes: &[u8], e: &Emit<'_>) -> Result<(), CliError> {
    let Some(out) = e.out else {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    };
    fs::write(out, bytes)?;
    let manifest = Manifest {
        subcommand: e.command,
        args: e.args,
        version: env!("CARGO_PKG_VERSION"),
        format: match e.format {
            Format::Json => "json",
            Format::Csv => "csv",
        },
        output: out.display().to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
        wall_ms: e.wall_ms,
        exit_code: e.exit_code,
    };
    let mut m = serde_json::to_vec_pretty(&manifest)?;
    m.push(b'\n');
    fs::write(manifest_path(out), m)?;
    Ok(())
}
