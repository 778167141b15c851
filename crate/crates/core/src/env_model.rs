//! Single-site environment laws, sampled environments, and the ballisticity
//! scalars Λ, s and v_p.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::{logsumexp, Extended};
use crate::rng::{self, TAG_ENVIRONMENT};

const WEIGHT_TOL: f64 = 1e-12;
const ELLIPTIC_SLACK: f64 = 1e-12;

/// One support point of the single-site law: right-jump probability `omega`
/// carried with probability `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub omega: f64,
    pub weight: f64,
}

impl Atom {
    /// `ρ = (1 − ω)/ω`.
    pub fn rho(&self) -> f64 {
        (1.0 - self.omega) / self.omega
    }

    pub fn log_rho(&self) -> f64 {
        ((1.0 - self.omega) / self.omega).ln()
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawDistribution {
    kappa: f64,
    atoms: Vec<Atom>,
}

/// A finite-support law for `ω₀` on `[κ, 1−κ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct EnvironmentDistribution {
    kappa: f64,
    atoms: Vec<Atom>,
}

impl TryFrom<RawDistribution> for EnvironmentDistribution {
    type Error = LabError;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        EnvironmentDistribution::new(raw.atoms, raw.kappa)
    }
}

impl EnvironmentDistribution {
    /// Validates and builds a distribution. Zero-weight atoms are dropped and
    /// atoms with equal `omega` are merged.
    pub fn new(atoms: Vec<Atom>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 0.5) {
            return Err(LabError::InvalidDistribution(format!(
                "kappa must lie in (0, 1/2], got {kappa}"
            )));
        }
        let mut kept: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut total = 0.0;
        for a in atoms {
            if !(a.weight >= 0.0 && a.weight <= 1.0 + WEIGHT_TOL) || !a.omega.is_finite() {
                return Err(LabError::InvalidDistribution(format!(
                    "bad atom {a:?}"
                )));
            }
            if a.omega < kappa - ELLIPTIC_SLACK || a.omega > 1.0 - kappa + ELLIPTIC_SLACK {
                return Err(LabError::Ellipticity {
                    omega: a.omega,
                    kappa,
                });
            }
            total += a.weight;
            if a.weight == 0.0 {
                continue;
            }
            match kept.iter_mut().find(|b| b.omega == a.omega) {
                Some(b) => b.weight += a.weight,
                None => kept.push(a),
            }
        }
        if kept.is_empty() {
            return Err(LabError::InvalidDistribution("no atom with positive weight".into()));
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(LabError::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        kept.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        Ok(Self { kappa, atoms: kept })
    }

    /// The two-atom law used throughout the test suite:
    /// `ω ∈ {2/3 w.p. 0.8, 1/3 w.p. 0.2}`, `κ = 0.1`, so `ρ ∈ {1/2, 2}` and `s = 2`.
    pub fn standard() -> Self {
        make_two_point(2.0 / 3.0, 1.0 / 3.0, 0.8, 0.1).expect("standard law is valid")
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Same support and kappa, new weights (in atom order).
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.atoms.len() {
            return Err(LabError::InvalidDistribution(format!(
                "expected {} weights, got {}",
                self.atoms.len(),
                weights.len()
            )));
        }
        let atoms = self
            .atoms
            .iter()
            .zip(weights)
            .map(|(a, &w)| Atom { omega: a.omega, weight: w })
            .collect();
        Self::new(atoms, self.kappa)
    }

    pub fn mean_rho(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.rho()).sum()
    }

    pub fn mean_log_rho(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.log_rho()).sum()
    }

    /// Inverse-CDF draw from a uniform in `[0, 1]`.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.weight;
            if u < acc {
                return a.omega;
            }
        }
        self.atoms[self.atoms.len() - 1].omega
    }
}

/// Two-point law `ω_a` w.p. `weight_a`, `ω_b` otherwise.
pub fn make_two_point(omega_a: f64, omega_b: f64, weight_a: f64, kappa: f64) -> Result<EnvironmentDistribution> {
    if !(0.0..=1.0).contains(&weight_a) {
        return Err(LabError::InvalidDistribution(format!("weight {weight_a} outside [0,1]")));
    }
    EnvironmentDistribution::new(
        vec![
            Atom { omega: omega_a, weight: weight_a },
            Atom { omega: omega_b, weight: 1.0 - weight_a },
        ],
        kappa,
    )
}

/// A realized environment `ω_i` for `i ∈ [lo, lo + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    lo: i64,
    values: Vec<f64>,
    kappa: f64,
    seed: Option<u64>,
}

impl Environment {
    /// Builds an environment from explicit values, checking ellipticity.
    pub fn from_values(lo: i64, values: Vec<f64>, kappa: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::InvalidArgument("empty environment".into()));
        }
        for &w in &values {
            if !(w >= kappa - ELLIPTIC_SLACK && w <= 1.0 - kappa + ELLIPTIC_SLACK) {
                return Err(LabError::Ellipticity { omega: w, kappa });
            }
        }
        Ok(Self {
            lo,
            values,
            kappa,
            seed: None,
        })
    }

    /// Constant environment `ω ≡ omega` on `[lo, lo + len)`.
    pub fn constant(lo: i64, len: usize, omega: f64, kappa: f64) -> Result<Self> {
        Self::from_values(lo, vec![omega; len], kappa)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// One past the last site.
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when every site in `[a, b]` is present.
    pub fn covers(&self, a: i64, b: i64) -> bool {
        a >= self.lo && b < self.hi()
    }

    pub fn require(&self, a: i64, b: i64) -> Result<()> {
        if self.covers(a, b) {
            Ok(())
        } else {
            Err(LabError::WindowTooShort {
                need_lo: a,
                need_hi: b,
                have_lo: self.lo,
                have_hi: self.hi() - 1,
            })
        }
    }

    #[inline]
    pub fn omega(&self, i: i64) -> f64 {
        self.values[(i - self.lo) as usize]
    }

    #[inline]
    pub fn try_omega(&self, i: i64) -> Option<f64> {
        if i >= self.lo && i < self.hi() {
            Some(self.values[(i - self.lo) as usize])
        } else {
            None
        }
    }

    #[inline]
    pub fn rho(&self, i: i64) -> f64 {
        let w = self.omega(i);
        (1.0 - w) / w
    }

    #[inline]
    pub fn log_rho(&self, i: i64) -> f64 {
        self.rho(i).ln()
    }

    /// Identity string used to tag derived objects.
    pub fn identity(&self) -> String {
        match self.seed {
            Some(s) => format!("seed={s};lo={};len={}", self.lo, self.values.len()),
            None => format!("explicit;lo={};len={}", self.lo, self.values.len()),
        }
    }
}

/// Options for [`sample_environment_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Replica index selecting the random stream.
    pub replica: u64,
    /// Use `1 − u` in place of `u` at every site.
    pub antithetic: bool,
}

/// I.i.d. sample of `dist` on `[lo, lo + len)` with replica 0.
pub fn sample_environment(dist: &EnvironmentDistribution, lo: i64, len: usize, seed: u64) -> Environment {
    sample_environment_with(dist, lo, len, seed, SampleOptions::default())
}

/// I.i.d. sample of `dist` on `[lo, lo + len)`. The value at site `i` depends
/// only on `(seed, replica, i)`, so overlapping windows agree.
pub fn sample_environment_with(
    dist: &EnvironmentDistribution,
    lo: i64,
    len: usize,
    seed: u64,
    opts: SampleOptions,
) -> Environment {
    let mut g = rng::site_rng(seed, rng::stream(opts.replica, TAG_ENVIRONMENT), lo);
    let values = (0..len)
        .map(|_| {
            let u = rng::uniform(&mut g);
            dist.quantile(if opts.antithetic { 1.0 - u } else { u })
        })
        .collect();
    Environment {
        lo,
        values,
        kappa: dist.kappa,
        seed: Some(seed),
    }
}

/// `Λ(θ) = log Σ_a w_a ρ_a^θ`.
pub fn log_mgf_rho(dist: &EnvironmentDistribution, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let terms: Vec<f64> = dist
        .atoms
        .iter()
        .map(|a| a.weight.ln() + theta * a.log_rho())
        .collect();
    logsumexp(&terms)
}

/// Derivative `Λ'(θ)`, the tilted mean of `log ρ`.
pub fn log_mgf_rho_derivative(dist: &EnvironmentDistribution, theta: f64) -> f64 {
    let lam = log_mgf_rho(dist, theta);
    dist.atoms
        .iter()
        .map(|a| (a.weight.ln() + theta * a.log_rho() - lam).exp() * a.log_rho())
        .sum()
}

/// Ballisticity scalars of a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallisticSummary {
    /// The positive root of `Λ`, or `+∞` when every `ρ`-atom is at most 1.
    pub lambda_root_s: Extended,
    pub velocity: f64,
    pub mean_rho: f64,
    pub mean_log_rho: f64,
}

/// Computes `s`, `v_p`, `E ρ` and `E log ρ`. Rejects laws with `E ρ ≥ 1`.
pub fn ballistic_summary(dist: &EnvironmentDistribution) -> Result<BallisticSummary> {
    let mean_rho = dist.mean_rho();
    let mean_log_rho = dist.mean_log_rho();
    if mean_rho >= 1.0 {
        return Err(LabError::NonBallistic { mean_rho });
    }
    let velocity = (1.0 - mean_rho) / (1.0 + mean_rho);
    let any_above_one = dist.atoms.iter().any(|a| a.rho() > 1.0);
    let lambda_root_s = if any_above_one {
        Extended::Finite(root_s(dist))
    } else {
        Extended::PosInfinity
    };
    Ok(BallisticSummary {
        lambda_root_s,
        velocity,
        mean_rho,
        mean_log_rho,
    })
}

/// Root of `Λ` on `(1, ∞)`: `Λ(1) = log E ρ < 0` and `Λ → ∞`.
fn root_s(dist: &EnvironmentDistribution) -> f64 {
    let mut lo = 1.0;
    let mut hi = 2.0;
    while log_mgf_rho(dist, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if log_mgf_rho(dist, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_rho_atoms() {
        let d = make_two_point(2.0 / 3.0, 1.0 / 3.0, 0.8, 0.1).unwrap();
        let mut rhos: Vec<(f64, f64)> = d.atoms().iter().map(|a| (a.rho(), a.weight)).collect();
        rhos.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((rhos[0].0 - 0.5).abs() < 1e-15 && (rhos[0].1 - 0.8).abs() < 1e-15);
        assert!((rhos[1].0 - 2.0).abs() < 1e-15 && (rhos[1].1 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_invalid() {
        let d = make_two_point(0.5, 0.5, 1.0, 0.2).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.atoms()[0].rho(), 1.0);
        assert!(matches!(
            make_two_point(0.05, 0.5, 0.5, 0.1),
            Err(LabError::Ellipticity { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_window_independent() {
        let d = EnvironmentDistribution::standard();
        let a = sample_environment(&d, 0, 1000, 42);
        let b = sample_environment(&d, 0, 1000, 42);
        assert_eq!(a, b);
        let c = sample_environment(&d, -50, 300, 42);
        for i in 0..250 {
            assert_eq!(a.omega(i), c.omega(i));
        }
        let one = make_two_point(0.7, 0.7, 1.0, 0.1).unwrap();
        assert!(sample_environment(&one, 0, 100, 3).values().iter().all(|&w| w == 0.7));
    }

    #[test]
    fn empirical_frequencies() {
        let d = EnvironmentDistribution::standard();
        let len = 1_000_000;
        let env = sample_environment(&d, 0, len, 9);
        let hits = env.values().iter().filter(|&&w| w > 0.5).count() as f64;
        let w = 0.8;
        let tol = 4.0 * (w * (1.0 - w) / len as f64).sqrt();
        assert!((hits / len as f64 - w).abs() < tol);
    }

    #[test]
    fn antithetic_flips_uniforms() {
        let d = make_two_point(0.7, 0.4, 0.5, 0.1).unwrap();
        let a = sample_environment_with(&d, 0, 500, 1, SampleOptions { replica: 0, antithetic: false });
        let b = sample_environment_with(&d, 0, 500, 1, SampleOptions { replica: 0, antithetic: true });
        let differ = a.values().iter().zip(b.values()).filter(|(x, y)| x != y).count();
        assert!(differ > 490);
    }

    #[test]
    fn log_mgf_examples() {
        let d = EnvironmentDistribution::standard();
        assert!((log_mgf_rho(&d, 1.0) - 0.8f64.ln()).abs() < 1e-14);
        assert!(log_mgf_rho(&d, 2.0).abs() < 1e-14);
        assert_eq!(log_mgf_rho(&d, 0.0), 0.0);
        let fair = make_two_point(0.5, 0.5, 1.0, 0.2).unwrap();
        assert!(log_mgf_rho(&fair, 3.7).abs() < 1e-15);
    }

    #[test]
    fn summary_examples() {
        let b = ballistic_summary(&EnvironmentDistribution::standard()).unwrap();
        assert!((b.lambda_root_s.finite().unwrap() - 2.0).abs() < 1e-10);
        assert!((b.velocity - 1.0 / 9.0).abs() < 1e-14);
        let half = make_two_point(2.0 / 3.0, 2.0 / 3.0, 1.0, 0.1).unwrap();
        let b = ballistic_summary(&half).unwrap();
        assert_eq!(b.lambda_root_s, Extended::PosInfinity);
        assert!((b.velocity - 1.0 / 3.0).abs() < 1e-14);
        let bad = make_two_point(2.0 / 3.0, 1.0 / 3.0, 0.5, 0.1).unwrap();
        assert!(matches!(ballistic_summary(&bad), Err(LabError::NonBallistic { .. })));
    }

    #[test]
    fn config_roundtrip_validates() {
        let d: EnvironmentDistribution =
            serde_json::from_str(r#"{"kappa":0.1,"atoms":[{"omega":0.6,"weight":0.5},{"omega":0.8,"weight":0.5}]}"#)
                .unwrap();
        assert_eq!(d.len(), 2);
        let bad: std::result::Result<EnvironmentDistribution, _> =
            serde_json::from_str(r#"{"kappa":0.1,"atoms":[{"omega":0.95,"weight":1.0}]}"#);
        assert!(bad.is_err());
    }

    fn arb_ballistic() -> impl Strategy<Value = EnvironmentDistribution> {
        (0.05f64..0.3, prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 2..4)).prop_filter_map(
            "ballistic",
            |(kappa, raw)| {
                let total: f64 = raw.iter().map(|r| r.1).sum();
                let atoms = raw
                    .iter()
                    .map(|&(t, w)| Atom {
                        omega: kappa + t * (1.0 - 2.0 * kappa),
                        weight: w / total,
                    })
                    .collect();
                let d = EnvironmentDistribution::new(atoms, kappa).ok()?;
                (d.mean_rho() < 0.999).then_some(d)
            },
        )
    }

    proptest! {
        #[test]
        fn lambda_convex_and_root(d in arb_ballistic(), a in -5.0f64..5.0, b in -5.0f64..5.0, t in 0.0f64..1.0) {
            let mid = log_mgf_rho(&d, t * a + (1.0 - t) * b);
            prop_assert!(mid <= t * log_mgf_rho(&d, a) + (1.0 - t) * log_mgf_rho(&d, b) + 1e-12);
            let s = ballistic_summary(&d).unwrap();
            prop_assert!(s.velocity > 0.0 && s.velocity < 1.0);
            if let Extended::Finite(s) = s.lambda_root_s {
                prop_assert!(s > 1.0);
                prop_assert!(log_mgf_rho(&d, s).abs() < 1e-9);
                prop_assert!(log_mgf_rho(&d, s / 2.0) < 0.0);
            }
        }
    }
}
