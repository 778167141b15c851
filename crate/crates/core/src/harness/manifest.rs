//! Run manifests, output digests, checkpoints and plot-data files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything needed to reproduce and audit one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub library_version: String,
    pub resolved_config: serde_json::Value,
    pub wall_time_seconds: f64,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<OutputDigest>,
    /// Replicas or grid points that failed and were excluded.
    pub failures: usize,
    pub invariant_failures: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Collects outputs and timings while an experiment runs.
pub struct RunRecorder {
    out_dir: PathBuf,
    started: Instant,
    stage_start: Instant,
    stages: Vec<StageTiming>,
    outputs: Vec<PathBuf>,
}

impl RunRecorder {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        let now = Instant::now();
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            started: now,
            stage_start: now,
            stages: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Closes the current stage.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push(StageTiming {
            stage: name.to_string(),
            seconds: (now - self.stage_start).as_secs_f64(),
        });
        self.stage_start = now;
    }

    /// Writes an output file relative to the run directory.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes)?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
        self.write(name, text.as_bytes())
    }

    pub fn finish(
        self,
        experiment: &str,
        config_hash: String,
        resolved_config: serde_json::Value,
        failures: usize,
        invariant_failures: Vec<String>,
    ) -> Result<RunManifest> {
        let outputs = self
            .outputs
            .iter()
            .map(|p| {
                Ok(OutputDigest {
                    path: p.strip_prefix(&self.out_dir).unwrap_or(p).display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            experiment: experiment.to_string(),
            config_hash,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            resolved_config,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            stages: self.stages,
            outputs,
            failures,
            invariant_failures,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::Io(e.to_string()))?;
        fs::write(self.out_dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

/// Per-grid-point checkpoints keyed by the config hash.
pub struct Checkpoints {
    dir: PathBuf,
    hash: String,
}

#[derive(Serialize, Deserialize)]
struct Stored<T> {
    config_hash: String,
    value: T,
}

impl Checkpoints {
    pub fn new(out_dir: &Path, hash: &str) -> Result<Self> {
        let dir = out_dir.join("checkpoints");
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            hash: hash.to_string(),
        })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// The stored value for `key`, if it was written under the same config hash.
    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let stored = serde_json::from_str::<Stored<T>>(&text).ok()?;
        (stored.config_hash == self.hash).then_some(stored.value)
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let stored = Stored {
            config_hash: self.hash.clone(),
            value,
        };
        let text = serde_json::to_string(&stored).map_err(|e| LabError::Io(e.to_string()))?;
        fs::write(self.path(key), text)?;
        Ok(())
    }

    /// Returns the stored value for `key` if it was written under the same
    /// config hash, otherwise computes, stores and returns it.
    pub fn get_or_compute<T, F>(&self, key: &str, compute: F) -> Result<T>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let value = compute()?;
        self.put(key, &value)?;
        Ok(value)
    }
}

/// Labelled `(x, y)` series for an external plotter.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PlotData {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) {
        self.series.push(Series {
            label: label.into(),
            x,
            y,
        });
    }
}
