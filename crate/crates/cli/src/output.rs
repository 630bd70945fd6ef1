use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Artifact sink: every file is written to a temporary file in the output
/// directory and renamed into place.
pub struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
    started: Instant,
    pub censoring_rate: Option<f64>,
    pub clipping_rate: Option<f64>,
    pub notes: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
            started: Instant::now(),
            censoring_rate: None,
            clipping_rate: None,
            notes: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let parent = path.parent().unwrap_or(&self.dir);
        std::fs::create_dir_all(parent)?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json`; its config hash covers the resolved config
    /// without the thread count and output directory, which do not change
    /// aggregate results.
    pub fn finish(mut self, cfg: &ExperimentConfig) -> Result<(), CliError> {
        let mut hashed = cfg.clone();
        hashed.threads = None;
        hashed.out = None;
        let canonical = serde_json::to_string(&hashed)?;
        let hash = Sha256::digest(canonical.as_bytes());
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        let manifest = Manifest {
            experiment: cfg.experiment(),
            config_sha256: hex,
            seed: cfg.seed.unwrap_or(0),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION"),
            core_version: forestlab_core::VERSION,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            censoring_rate: self.censoring_rate,
            clipping_rate: self.clipping_rate,
            notes: std::mem::take(&mut self.notes),
            artifacts: self.artifacts.clone(),
            config: cfg.clone(),
        };
        self.json("manifest.json", &manifest)
    }
}

#[derive(Serialize)]
struct Manifest {
    experiment: crate::config::Experiment,
    config_sha256: String,
    seed: u64,
    threads: usize,
    version: &'static str,
    core_version: &'static str,
    wall_time_secs: f64,
    censoring_rate: Option<f64>,
    clipping_rate: Option<f64>,
    notes: Vec<String>,
    artifacts: Vec<String>,
    config: ExperimentConfig,
}

/// Shortest round-trip formatting for CSV cells.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}
