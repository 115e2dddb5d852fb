// SPDX-License-Identifier: Apache-2.0

//! Artifact writers. Every file is written to a temporary sibling and
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use tempfile::NamedTempFile;

/// Top-level JSON document: a schema tag, the effective configuration and
/// the payload. Holds nothing that varies between identical runs.
#[derive(Debug, Serialize)]
pub struct Document<'a, C: Serialize, R: Serialize> {
    pub schema: &'static str,
    pub config: &'a C,
    pub result: &'a R,
}

/// Run metadata, written next to the main document as `<out>.run.json`.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub config_file: Option<String>,
    pub started_unix_seconds: f64,
    pub elapsed_seconds: f64,
    pub outputs: Vec<String>,
}

pub struct Run {
    started: SystemTime,
    clock: Instant,
    config_file: Option<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn start(config_file: Option<&Path>) -> Self {
        Self {
            started: SystemTime::now(),
            clock: Instant::now(),
            config_file: config_file.map(Path::to_path_buf),
            outputs: Vec::new(),
        }
    }

    pub fn json(&mut self, path: &Path, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn csv(&mut self, path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        write_atomic(path, &bytes)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Writes the metadata sidecar for the document at `main`.
    pub fn finish(self, main: &Path) -> Result<()> {
        let started = self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let meta = RunMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            config_file: self.config_file.map(|p| p.display().to_string()),
            started_unix_seconds: started,
            elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
        };
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        write_atomic(&with_suffix(main, ".run"), text.as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// `prefix` with `suffix` appended to its file name, keeping any extension
/// after the suffix: `out/run.json` + `_left` gives `out/run_left.json`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

/// Output prefix to `(json, csv)` paths.
pub fn artifact_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    (prefix.with_extension("json"), prefix.with_extension("csv"))
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
