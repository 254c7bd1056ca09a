//! CSV series, JSON reports and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use dressq::Tolerances;

use crate::config::OutputConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_SCHEMA: &str = "dressq.manifest.v1";

/// Writes the artifacts of one run into a directory.
pub struct Sink {
    dir: PathBuf,
    csv: bool,
    json: bool,
    written: Vec<String>,
}

impl Sink {
    pub fn new(cfg: &OutputConfig) -> CliResult<Self> {
        std::fs::create_dir_all(&cfg.dir).map_err(|source| CliError::Write {
            path: cfg.dir.clone(),
            source,
        })?;
        Ok(Self {
            dir: cfg.dir.clone(),
            csv: cfg.csv,
            json: cfg.json,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Numbers are written in Rust's shortest round-trip form, so identical
    /// values always give identical bytes.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
        if !self.csv {
            return Ok(());
        }
        let path = self.dir.join(name);
        let io = |e: csv::Error| CliError::Write {
            path: path.clone(),
            source: e.into(),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        if !self.json {
            return Ok(());
        }
        self.write_json(name, value)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Write { path, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// The manifest is written regardless of the format flags.
    pub fn manifest(&mut self, m: &RunManifest) -> CliResult<()> {
        self.write_json("manifest.json", m)
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub millis: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Timer {
    phases: Vec<PhaseTiming>,
}

impl Timer {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(PhaseTiming {
            phase: phase.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }

    pub fn into_phases(self) -> Vec<PhaseTiming> {
        self.phases
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub artifact_version: &'static str,
    pub task: &'static str,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub parallel: bool,
    pub timings: Vec<PhaseTiming>,
    pub tolerances: Tolerances,
    pub outputs: Vec<String>,
}
