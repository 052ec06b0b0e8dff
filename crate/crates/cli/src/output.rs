//! CSV and JSON emission with an embedded run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// What was run, with which inputs, by which build, and how long it took.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub elapsed_seconds: f64,
}

pub struct Sink {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub started: Instant,
}

impl Sink {
    fn manifest(&self, command: &str, parameters: Value, seed: Option<u64>) -> Manifest {
        Manifest {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
        }
    }

    /// Writes `rows` with the manifest; `summary` goes into the JSON document or,
    /// for CSV, to stderr.
    pub fn emit<T: Serialize>(
        &self,
        command: &str,
        parameters: Value,
        seed: Option<u64>,
        rows: &[T],
        summary: Option<Value>,
    ) -> Result<(), CliError> {
        let manifest = self.manifest(command, parameters, seed);
        let mut out: Box<dyn Write> = match &self.path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        match self.format {
            Format::Json => {
                let mut doc = json!({ "schema_version": SCHEMA_VERSION, "manifest": manifest, "data": rows });
                if let Some(s) = summary {
                    doc["summary"] = s;
                }
                serde_json::to_writer_pretty(&mut out, &doc).map_err(CliError::output)?;
                writeln!(out).map_err(CliError::output)?;
            }
            Format::Csv => {
                writeln!(out, "# schema_version: {SCHEMA_VERSION}").map_err(CliError::output)?;
                let m = serde_json::to_string(&manifest).map_err(CliError::output)?;
                writeln!(out, "# manifest: {m}").map_err(CliError::output)?;
                let mut w = csv::Writer::from_writer(&mut out);
                for r in rows {
                    w.serialize(r).map_err(CliError::output)?;
                }
                w.flush().map_err(CliError::output)?;
                drop(w);
                if let Some(s) = summary {
                    eprintln!("summary: {s}");
                }
            }
        }
        out.flush().map_err(CliError::output)
    }
}
