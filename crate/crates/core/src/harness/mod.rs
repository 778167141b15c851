//! Configuration, manifests, the invariant battery and the experiment
//! drivers behind the `rwre-lab` binary.

pub mod battery;
pub mod config;
pub mod experiments;
pub mod manifest;

use serde_json::Value;

use crate::error::{LabError, Result};
pub use config::{ExperimentConfig, ExperimentKind};
pub use manifest::RunManifest;

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub summary: Value,
    pub invariant_failures: Vec<String>,
}

/// Runs a resolved config on a pool of `cfg.workers` threads and writes
/// `summary.json` and `manifest.json` into `cfg.out_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    let mut rec = manifest::RunRecorder::new(&cfg.out_dir)?;
    let report = pool.install(|| experiments::run_kind(cfg, &mut rec))?;
    rec.write_json("summary.json", &report.summary)?;
    let resolved = serde_json::to_value(cfg).map_err(|e| LabError::Io(e.to_string()))?;
    let manifest = rec.finish(
        cfg.kind().name(),
        cfg.hash(),
        resolved,
        report.failures,
        report.invariant_failures.clone(),
    )?;
    Ok(RunOutcome {
        manifest,
        summary: report.summary,
        invariant_failures: report.invariant_failures,
    })
}

/// Process exit code for an error: 2 for configuration problems, 3 for
/// numeric truncation, 1 otherwise.
pub fn exit_code(err: &LabError) -> i32 {
    match err {
        LabError::Config(_)
        | LabError::InvalidDistribution(_)
        | LabError::Ellipticity { .. }
        | LabError::NonBallistic { .. } => 2,
        LabError::TruncationFailure { .. } | LabError::ContextTooShort { .. } => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn small_chi(out: &std::path::Path, workers: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::default_for(ExperimentKind::Chi);
        c.out_dir = out.to_path_buf();
        c.workers = workers;
        c.params.k = 40;
        c.params.n_samples = 200;
        c
    }

    #[test]
    fn csv_bytes_do_not_depend_on_workers() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run(&small_chi(a.path(), 1)).unwrap();
        let rb = run(&small_chi(b.path(), 4)).unwrap();
        assert_eq!(
            fs::read(a.path().join("chi.csv")).unwrap(),
            fs::read(b.path().join("chi.csv")).unwrap()
        );
        let digest = |m: &RunManifest| m.outputs.iter().find(|o| o.path == "chi.csv").unwrap().sha256.clone();
        assert_eq!(digest(&ra.manifest), digest(&rb.manifest));
        assert_ne!(ra.manifest.config_hash, rb.manifest.config_hash);
    }

    #[test]
    fn selftest_negative_control_reports_failure() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::default_for(ExperimentKind::Selftest);
        c.out_dir = dir.path().to_path_buf();
        c.params.selftest.instances = 8;
        c.params.selftest.inject_corruption = true;
        let out = run(&c).unwrap();
        assert!(out.invariant_failures.iter().any(|f| f.starts_with("S decomposition")));
        assert_eq!(out.manifest.invariant_failures, out.invariant_failures);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&LabError::Config("x".into())), 2);
        assert_eq!(exit_code(&LabError::TruncationFailure { depth: 3 }), 3);
        assert_eq!(exit_code(&LabError::Undefined("x".into())), 1);
    }
}
