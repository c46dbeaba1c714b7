//! Report persistence: JSON documents, CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const ARTIFACT: &str = "holocurve";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct EmittedFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes reports into one directory and remembers their digests.
pub struct Emitter {
    dir: PathBuf,
    echo: Value,
    config_sha256: String,
    files: Vec<EmittedFile>,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip decimal; non-finite values spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Emitter {
    pub fn new(dir: &Path, echo: Value) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        // Object keys are sorted, so this serialization is canonical.
        let config_sha256 = sha256_hex(&serde_json::to_vec(&echo)?);
        Ok(Self { dir: dir.to_path_buf(), echo, config_sha256, files: Vec::new(), started: Instant::now() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(EmittedFile { path: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, schema: &str, report: &T) -> Result<(), CliError> {
        let doc = json!({
            "schema": schema,
            "config": self.echo,
            "config_sha256": self.config_sha256,
            "report": report,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Row 1 carries the schema string and config digest, row 2 the header.
    pub fn csv(&mut self, name: &str, schema: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record([format!("schema={schema}"), format!("config_sha256={}", self.config_sha256)])?;
        w.write_record(header)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.write(name, &bytes)
    }

    pub fn finish(self, command: &str) -> Result<Vec<EmittedFile>, CliError> {
        let manifest = json!({
            "artifact": ARTIFACT,
            "version": VERSION,
            "command": command,
            "config": self.echo,
            "config_sha256": self.config_sha256,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "files": self.files,
        });
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(self.files)
    }
}
