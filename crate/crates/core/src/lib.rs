//! Numerical laboratory for the Erdős–Rényi law of maximal increments of a
//! ballistic one-dimensional random walk in an i.i.d. random environment.
//!
//! The crate is organised bottom-up:
//!
//! * [`env_model`]: single-site laws, sampling, `Λ`, `s`, `v_p`.
//! * [`potential`]: `V`, `log S`, `W`, `ξ`, `ξ̄`, exit probabilities, `Δ_ε`.
//! * [`conditioned_env`]: the conditioned environments `ω̂` and `ω̂^L`.
//! * [`quenched_walk`]: exact simulation, hitting records, `Ẋ(k, n)`, backtracking.
//! * [`hitting_kernels`]: finite-horizon hitting DPs, `φ`, truncated `φ`, `Î` rates.
//! * [`rate_functions`]: Cramér, `I_m`, `I^F`, restricted `I*`, `x*(A)`.
//! * [`chi_estimator`]: Monte Carlo `χ(k, x, c)` and its logarithmic slope.
//! * [`harness`]: configuration, experiments, manifests, self-test.

pub mod chi_estimator;
pub mod conditioned_env;
pub mod env_model;
pub mod error;
pub mod harness;
pub mod hitting_kernels;
pub mod numerics;
pub mod optimize;
pub mod potential;
pub mod quenched_walk;
pub mod rate_functions;
pub mod rng;

pub use error::{LabError, Result};
