//! Output assembly: CSV with a hash comment line, JSON with a hash field.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Shortest representation that parses back to the same double.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV table, kept in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>, CliError> {
        let mut buf = format!("# config_hash={config_hash}\n").into_bytes();
        {
            let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn to_json<T: Serialize>(config_hash: &str, body: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(&Envelope { config_hash, body })?;
    buf.push(b'\n');
    Ok(buf)
}

/// Everything one subcommand produces.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub main: Vec<u8>,
    /// Extra files written next to the main output, keyed by suffix.
    pub sidecars: Vec<(&'static str, Vec<u8>)>,
}

/// `out.csv` with suffix `boundary.csv` becomes `out.boundary.csv`.
pub fn sidecar_path(main: &Path, suffix: &str) -> PathBuf {
    let stem = main
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    main.with_file_name(format!("{stem}.{suffix}"))
}

pub fn emit(artifacts: &Artifacts, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, &artifacts.main)?;
            for (suffix, bytes) in &artifacts.sidecars {
                fs::write(sidecar_path(p, suffix), bytes)?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&artifacts.main)?;
            out.flush()?;
            if !artifacts.sidecars.is_empty() {
                log::warn!(
                    "no output path given; skipped {} sidecar file(s)",
                    artifacts.sidecars.len()
                );
            }
        }
    }
    Ok(())
}
