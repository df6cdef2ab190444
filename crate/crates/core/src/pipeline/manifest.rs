//! Run manifests and small output helpers shared by the commands.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeFailure {
    pub cascade_id: String,
    pub error: String,
}

/// Lifecycle indices of one analysed cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifecycleEntry {
    pub cascade_id: String,
    pub windows: usize,
    pub steep_window: usize,
    pub steep_fallback: bool,
    pub t_steep: f64,
    pub inhib_window: Option<usize>,
    pub t_inhib: Option<f64>,
    pub steep_network: Option<usize>,
    pub inhib_network: Option<usize>,
    pub dropped_reshare_edges: usize,
}

/// Provenance of one command's output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub config: RunConfig,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub warnings: BTreeMap<String, u64>,
    pub failures: Vec<CascadeFailure>,
    pub lifecycle: Vec<LifecycleEntry>,
    /// Output file name to SHA-256 digest.
    pub outputs: BTreeMap<String, String>,
    /// Command-specific facts such as input paths or chosen thresholds.
    pub details: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_owned(),
            command: command.to_owned(),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            config: config.clone(),
            timings: BTreeMap::new(),
            warnings: BTreeMap::new(),
            failures: Vec::new(),
            lifecycle: Vec::new(),
            outputs: BTreeMap::new(),
            details: BTreeMap::new(),
        }
    }

    /// Runs `f` and records its duration under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        *self.timings.entry(stage.to_owned()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn warn(&mut self, key: &str, n: u64) {
        if n > 0 {
            *self.warnings.entry(key.to_owned()).or_default() += n;
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.details.insert(key.to_owned(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_slice(&text)?)
    }
}

/// Tracks the files a command writes so their digests land in the manifest.
pub struct OutputDir {
    pub dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(OutputDir { dir, written: Vec::new() })
    }

    pub fn path(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn csv(&mut self, name: &str) -> Result<CsvOut> {
        let path = self.path(name)?;
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(CsvOut {
            writer: csv::Writer::from_writer(BufWriter::new(file)),
            path,
        })
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.path(name)?;
        write_json(&path, value)
    }

    /// Digests every written file into the manifest and writes it.
    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest> {
        for path in &self.written {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let rel = path.strip_prefix(&self.dir).unwrap_or(path);
            manifest
                .outputs
                .insert(rel.to_string_lossy().replace('\\', "/"), super::corpus::digest(&bytes));
        }
        manifest.write(&self.dir)?;
        Ok(manifest)
    }
}

pub struct CsvOut {
    writer: csv::Writer<BufWriter<File>>,
    path: PathBuf,
}

impl CsvOut {
    pub fn row<I, T>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Shortest round-trip formatting for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
