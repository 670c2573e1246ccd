//! CSV tables with `#` metadata lines, and JSON reports.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits: exact round trip for `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), num)
}

pub struct Table {
    pub columns: Vec<&'static str>,
    /// One line describing the columns.
    pub description: String,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>, description: impl Into<String>) -> Self {
        Table { columns, description: description.into(), notes: Vec::new(), rows: Vec::new() }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, config: &RunConfig, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# neqfridge {VERSION}")?;
        writeln!(w, "# command: {}", config.command)?;
        writeln!(w, "# config: {}", config.pairs())?;
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        writeln!(w, "# columns: {}", self.description)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, config: &RunConfig, path: &Path) -> io::Result<()> {
        let mut w = io::BufWriter::new(std::fs::File::create(path)?);
        self.write(config, &mut w)?;
        w.flush()
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    report: &'a T,
}

/// Pretty JSON with version and resolved configuration, to `path` or stdout.
pub fn write_json<T: Serialize>(config: &RunConfig, report: &T, path: Option<&Path>) -> io::Result<()> {
    let env = Envelope { version: VERSION, config, report };
    let text = serde_json::to_string_pretty(&env).map_err(io::Error::other)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n"),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")
        }
    }
}
