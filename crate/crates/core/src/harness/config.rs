//! Experiment configuration read from a TOML file.
//!
//! ```toml
//! experiment = "chi-slope"   # optional, must match the subcommand
//! seed = 7
//! workers = 1
//! out_dir = "out/chi"
//!
//! [distribution]
//! kappa = 0.1
//! atoms = [{ omega = 0.6666666666666666, weight = 0.8 },
//!          { omega = 0.3333333333333333, weight = 0.2 }]
//!
//! [params]
//! x_grid = [0.5, 0.6, 0.7]
//! c_grid = [4.0, 8.0]
//! k_grid = [100, 200, 300, 400]
//! n_samples = 10000
//! ```
//!
//! Every omitted field takes its default, and the fully resolved config is
//! echoed into the run manifest.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env_model::EnvironmentDistribution;
use crate::error::{LabError, Result};
use crate::rate_functions::IncrementLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ErClassic,
    ErRwre,
    Chi,
    ChiSlope,
    RateIm,
    RateIf,
    RateIstar,
    Xstar,
    Hitprob,
    Selftest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        Self::ErClassic,
        Self::ErRwre,
        Self::Chi,
        Self::ChiSlope,
        Self::RateIm,
        Self::RateIf,
        Self::RateIstar,
        Self::Xstar,
        Self::Hitprob,
        Self::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ErClassic => "er-classic",
            Self::ErRwre => "er-rwre",
            Self::Chi => "chi",
            Self::ChiSlope => "chi-slope",
            Self::RateIm => "rate-im",
            Self::RateIf => "rate-if",
            Self::RateIstar => "rate-istar",
            Self::Xstar => "xstar",
            Self::Hitprob => "hitprob",
            Self::Selftest => "selftest",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown experiment '{s}'")))
    }
}

/// A finite increment law for the classical experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncrementSpec {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Default for IncrementSpec {
    fn default() -> Self {
        Self {
            values: vec![-1.0, 1.0],
            probs: vec![0.5, 0.5],
        }
    }
}

/// Negative-control switches for the self-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestParams {
    /// Perturb one `log S` entry before the decomposition check.
    pub inject_corruption: bool,
    /// Round potential profiles to single precision before the W check.
    pub reduced_precision: bool,
    /// Instances per randomized check.
    pub instances: usize,
}

impl Default for SelftestParams {
    fn default() -> Self {
        Self {
            inject_corruption: false,
            reduced_precision: false,
            instances: 50,
        }
    }
}

/// Numeric parameters. Each experiment reads the subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub n_grid: Vec<u64>,
    pub alpha: f64,
    pub a: f64,
    pub a_grid: Vec<f64>,
    pub k: usize,
    pub k_grid: Vec<usize>,
    pub x: f64,
    pub x_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub l: usize,
    pub l_grid: Vec<usize>,
    pub eps: f64,
    pub n_samples: usize,
    pub n_sites: usize,
    pub replicas: usize,
    pub antithetic: bool,
    pub grid_step: f64,
    /// Left margin of the environment window in the RWRE run.
    pub margin: usize,
    /// Compute the `x*(A)` band in the RWRE run.
    pub x_star_band: bool,
    /// Values of the RWRE statistic count as in band on `[x_lo − band_tol, 1]`.
    pub band_tol: f64,
    /// Environments averaged per `k` in the hitting-probability run.
    pub envs: usize,
    pub selftest: SelftestParams,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n_grid: vec![100_000, 1_000_000, 10_000_000],
            alpha: 0.5,
            a: 5.0,
            a_grid: vec![5.0],
            k: 200,
            k_grid: vec![100, 200, 300, 400],
            x: 0.6,
            x_grid: vec![0.5, 0.6, 0.7],
            c_grid: vec![4.0, 8.0],
            z_grid: (0..=20).map(|i| -0.6 + 0.06 * i as f64).collect(),
            y_grid: vec![0.0, 0.1, 0.3, 0.5, 1.0],
            l: 64,
            l_grid: vec![1, 2, 4, 8, 16, 32, 64],
            eps: 0.05,
            n_samples: 10_000,
            n_sites: 20_000,
            replicas: 3,
            antithetic: false,
            grid_step: 0.05,
            margin: 10_000,
            x_star_band: true,
            band_tol: 0.15,
            envs: 20,
            selftest: SelftestParams::default(),
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_workers() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default = "EnvironmentDistribution::standard")]
    pub distribution: EnvironmentDistribution,
    #[serde(default)]
    pub increments: IncrementSpec,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    /// All defaults for `kind`.
    pub fn default_for(kind: ExperimentKind) -> Self {
        Self {
            experiment: Some(kind),
            seed: default_seed(),
            workers: default_workers(),
            out_dir: default_out(),
            distribution: EnvironmentDistribution::standard(),
            increments: IncrementSpec::default(),
            params: Params::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Applies the subcommand and command-line overrides, then validates.
    pub fn resolve(
        mut self,
        kind: ExperimentKind,
        seed: Option<u64>,
        workers: Option<usize>,
        out: Option<PathBuf>,
    ) -> Result<Self> {
        match self.experiment {
            Some(k) if k != kind => {
                return Err(LabError::Config(format!("config is for '{k}', subcommand is '{kind}'")));
            }
            _ => self.experiment = Some(kind),
        }
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(w) = workers {
            self.workers = w;
        }
        if let Some(o) = out {
            self.out_dir = o;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.unwrap_or(ExperimentKind::Selftest)
    }

    pub fn increment_law(&self) -> Result<IncrementLaw> {
        IncrementLaw::new(self.increments.values.clone(), self.increments.probs.clone())
            .map_err(|e| LabError::Config(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        let p = &self.params;
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if p.x_grid.iter().chain([&p.x]).any(|x| !(*x > 0.0)) {
            return bad("x values must be positive");
        }
        if p.k == 0 || p.k_grid.iter().any(|&k| k == 0) {
            return bad("k values must be positive");
        }
        if p.k_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("k_grid must be increasing");
        }
        if p.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n_grid must be increasing");
        }
        if p.l == 0 || p.l_grid.iter().any(|&l| l == 0) {
            return bad("L values must be at least 1");
        }
        if !(p.a > 0.0) || p.a_grid.iter().any(|a| !(*a > 0.0)) {
            return bad("A values must be positive");
        }
        if p.n_samples == 0 || p.n_sites == 0 || p.replicas == 0 || p.envs == 0 {
            return bad("n_samples, n_sites, replicas and envs must be positive");
        }
        if !(p.grid_step > 0.0 && p.grid_step <= 0.5) {
            return bad("grid_step must lie in (0, 1/2]");
        }
        self.increment_law()?;
        Ok(())
    }

    /// Canonical JSON of the resolved config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
