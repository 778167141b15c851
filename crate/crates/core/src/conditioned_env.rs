//! Doob-conditioned environments: `ω̂` (the walk conditioned never to hit
//! the origin) and its stationary `L`-window truncation `ω̂^L`.
//!
//! Both the right and the left jump probabilities are stored. The left one
//! is evaluated from its own closed form instead of as `1 − right`, which
//! keeps tiny left probabilities accurate.

use crate::env_model::Environment;
use crate::error::{LabError, Result};
use crate::numerics::log1mexp;
use crate::potential::PotentialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionedKind {
    Hat,
    HatL(usize),
}

/// Transition probabilities of a conditioned walk on sites `[lo, lo + len)`.
#[derive(Debug, Clone)]
pub struct ConditionedEnvironment {
    kind: ConditionedKind,
    lo: i64,
    right: Vec<f64>,
    left: Vec<f64>,
    source: String,
}

impl ConditionedEnvironment {
    /// Builds from explicit per-site probabilities. Used by tests and by
    /// callers that want to run the kernels on a plain environment.
    pub fn from_parts(kind: ConditionedKind, lo: i64, right: Vec<f64>, left: Vec<f64>, source: String) -> Result<Self> {
        if right.len() != left.len() || right.is_empty() {
            return Err(LabError::InvalidArgument("right/left length mismatch".into()));
        }
        for (r, l) in right.iter().zip(&left) {
            if !(*r > 0.0 && *r <= 1.0 && *l >= 0.0 && (r + l - 1.0).abs() < 1e-12) {
                return Err(LabError::InvalidArgument(format!("bad transition pair ({r}, {l})")));
            }
        }
        Ok(Self {
            kind,
            lo,
            right,
            left,
            source,
        })
    }

    /// The raw environment viewed as a (trivially) conditioned one.
    pub fn from_environment(env: &Environment) -> Self {
        Self {
            kind: ConditionedKind::HatL(0),
            lo: env.lo(),
            right: env.values().to_vec(),
            left: env.values().iter().map(|w| 1.0 - w).collect(),
            source: env.identity(),
        }
    }

    pub fn kind(&self) -> ConditionedKind {
        self.kind
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// One past the last site.
    pub fn hi(&self) -> i64 {
        self.lo + self.right.len() as i64
    }

    pub fn len(&self) -> usize {
        self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.right.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn covers(&self, a: i64, b: i64) -> bool {
        a >= self.lo && b < self.hi()
    }

    pub fn require(&self, a: i64, b: i64) -> Result<()> {
        if self.covers(a, b) {
            Ok(())
        } else {
            Err(LabError::Coverage(format!(
                "need sites [{a}, {b}], have [{}, {}]",
                self.lo,
                self.hi() - 1
            )))
        }
    }

    /// Right-jump probability at site `i`.
    #[inline]
    pub fn right(&self, i: i64) -> f64 {
        self.right[(i - self.lo) as usize]
    }

    /// Left-jump probability at site `i`.
    #[inline]
    pub fn left(&self, i: i64) -> f64 {
        self.left[(i - self.lo) as usize]
    }

    pub fn right_slice(&self) -> &[f64] {
        &self.right
    }

    pub fn left_slice(&self) -> &[f64] {
        &self.left
    }

    /// `log ρ̂_i = log(left/right)`; `-∞` where the left probability is 0.
    #[inline]
    pub fn log_rho(&self, i: i64) -> f64 {
        (self.left(i) / self.right(i)).ln()
    }

    /// Restriction to sites `[a, b]`.
    pub fn window(&self, a: i64, b: i64) -> Result<Self> {
        self.require(a, b)?;
        let s = (a - self.lo) as usize;
        let e = (b - self.lo) as usize + 1;
        Ok(Self {
            kind: self.kind,
            lo: a,
            right: self.right[s..e].to_vec(),
            left: self.left[s..e].to_vec(),
            source: self.source.clone(),
        })
    }
}

/// `ω̂_i = ω_i S(i+1)/S(i)` for `i ∈ [1, hi]` from a from-origin profile.
/// Site 1 is stored as exactly `(right, left) = (1, 0)`.
pub fn hat_transform(profile: &PotentialProfile, hi: i64) -> Result<ConditionedEnvironment> {
    if profile.origin() != 0 {
        return Err(LabError::InvalidArgument("hat transform needs a from-origin profile".into()));
    }
    if hi < 1 {
        return Err(LabError::InvalidArgument(format!("hi must be ≥ 1, got {hi}")));
    }
    if (hi as usize) + 1 > profile.n_max() {
        return Err(LabError::WindowTooShort {
            need_lo: 1,
            need_hi: hi + 1,
            have_lo: 1,
            have_hi: profile.n_max() as i64,
        });
    }
    let n = hi as usize;
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    right.push(1.0);
    left.push(0.0);
    for i in 2..=n {
        let w = profile.omega(i);
        // ω̂ = ω(1 + W(i)), 1 − ω̂ = (1 − ω) S(i−1)/S(i)
        right.push((w * (1.0 + profile.log_w(i).exp())).min(1.0));
        left.push((1.0 - w) * (profile.log_s(i - 1) - profile.log_s(i)).exp());
    }
    Ok(ConditionedEnvironment {
        kind: ConditionedKind::Hat,
        lo: 1,
        right,
        left,
        source: profile.env_id().to_string(),
    })
}

/// `1/W(n, θ^{i−L}ω)` for `n = L − 1` and `n = L`, computed by the recursion
/// `1/W(n) = (1 + 1/W(n−1))/ρ` over sites `i−L+1, …, i`.
fn inverse_w_pair(env: &Environment, i: i64, l: usize) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 0.0;
    if l <= 256 {
        for t in 1..=l as i64 {
            prev = cur;
            cur = (1.0 + cur) / env.rho(i - l as i64 + t);
        }
        (prev, cur)
    } else {
        let mut lcur = f64::NEG_INFINITY;
        let mut lprev = f64::NEG_INFINITY;
        for t in 1..=l as i64 {
            lprev = lcur;
            lcur = crate::numerics::logaddexp(0.0, lcur) - env.log_rho(i - l as i64 + t);
        }
        (lprev.exp(), lcur.exp())
    }
}

/// `ω̂^L_i = ω_i S(L+1, θ^{i−L}ω)/S(L, θ^{i−L}ω)` for `i ∈ [lo, hi]`.
/// Each site uses only `ω_{i−L+1}, …, ω_i`.
pub fn hat_l_transform(env: &Environment, l: usize, lo: i64, hi: i64) -> Result<ConditionedEnvironment> {
    if l == 0 {
        return Err(LabError::InvalidArgument("L must be positive".into()));
    }
    if hi < lo {
        return Err(LabError::Ordering(format!("empty window [{lo}, {hi}]")));
    }
    let need = lo - l as i64 + 1;
    env.require(need, hi)?;
    let n = (hi - lo + 1) as usize;
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for i in lo..=hi {
        let w = env.omega(i);
        let (inv_prev, inv_cur) = inverse_w_pair(env, i, l);
        right.push((w * (1.0 + 1.0 / inv_cur)).min(1.0));
        // 1 − ω̂^L = (1 − ω)/(1 + W(L−1)); W(0) = ∞
        left.push(if inv_prev == 0.0 {
            0.0
        } else {
            (1.0 - w) / (1.0 + 1.0 / inv_prev)
        });
    }
    Ok(ConditionedEnvironment {
        kind: ConditionedKind::HatL(l),
        lo,
        right,
        left,
        source: env.identity(),
    })
}

/// Right probability of `ω̂^L_i` from a from-origin profile via
/// `ω_i (S(i+1) − S(i−L))/(S(i) − S(i−L))`, with `S(i−L)` read as 0 when
/// `i ≤ L` (so the value then coincides with `ω̂_i`).
pub fn hat_l_from_profile(profile: &PotentialProfile, l: usize, i: usize) -> Result<f64> {
    if i == 0 || i + 1 > profile.n_max() {
        return Err(LabError::WindowTooShort {
            need_lo: 1,
            need_hi: i as i64 + 1,
            have_lo: 1,
            have_hi: profile.n_max() as i64,
        });
    }
    let w = profile.omega(i);
    if i <= l {
        return Ok(w * (profile.log_s(i + 1) - profile.log_s(i)).exp());
    }
    let base = profile.log_s(i - l);
    let num = profile.log_s(i + 1) + log1mexp(base - profile.log_s(i + 1));
    let den = profile.log_s(i) + log1mexp(base - profile.log_s(i));
    Ok(w * (num - den).exp())
}

/// Absolute log residual of the shift identity
/// `S(a, θ^b ω̂) = (S(b+1) S(b)/e^{V(b)}) (1/S(b) − 1/S(a+b))`.
///
/// The left side is summed directly from `ρ̂ = left/right` of the
/// conditioned environment. The right side is evaluated as
/// `S(b+1) S(a, θ^b ω)/S(a+b)` with `S(a, θ^b ω)` from an independently
/// built shifted profile, which avoids the cancellation in `1/S(b) − 1/S(a+b)`.
pub fn shat_shift_check(env: &Environment, profile: &PotentialProfile, a: usize, b: usize) -> Result<f64> {
    if a == 0 {
        return Err(LabError::InvalidArgument("a must be positive".into()));
    }
    let top = a + b + 1;
    if top > profile.n_max() {
        return Err(LabError::WindowTooShort {
            need_lo: 1,
            need_hi: top as i64,
            have_lo: 1,
            have_hi: profile.n_max() as i64,
        });
    }
    let hat = hat_transform(profile, (a + b) as i64)?;
    let mut acc = crate::numerics::StreamingLogSumExp::new();
    let mut v = 0.0;
    acc.push(0.0);
    for j in 1..a {
        v += hat.log_rho((b + j) as i64);
        acc.push(v);
    }
    let direct = acc.value();
    let closed = if b == 0 {
        0.0
    } else {
        let shifted = PotentialProfile::build(env, b as i64, a)?;
        profile.log_s(b + 1) + shifted.log_s(a) - profile.log_s(a + b)
    };
    Ok((direct - closed).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{sample_environment, EnvironmentDistribution};
    use crate::potential::build_profile;

    #[test]
    fn hat_fair_coin() {
        let env = Environment::constant(0, 100, 0.5, 0.1).unwrap();
        let p = build_profile(&env, 60).unwrap();
        let h = hat_transform(&p, 50).unwrap();
        assert_eq!(h.right(1), 1.0);
        assert_eq!(h.left(1), 0.0);
        for i in 1..=50i64 {
            let want = (i + 1) as f64 / (2 * i) as f64;
            assert!((h.right(i) - want).abs() < 1e-14);
            assert!((h.left(i) - (1.0 - want)).abs() < 1e-14);
        }
    }

    #[test]
    fn hat_dominates_and_sums_to_one() {
        let d = EnvironmentDistribution::standard();
        let env = sample_environment(&d, 0, 600, 4);
        let p = build_profile(&env, 501).unwrap();
        let h = hat_transform(&p, 500).unwrap();
        for i in 1..=500 {
            assert!(h.right(i) >= env.omega(i));
            assert!((h.right(i) + h.left(i) - 1.0).abs() < 1e-14);
        }
        assert!(hat_transform(&p, 501).is_err());
    }

    #[test]
    fn hat_l_examples() {
        let env = Environment::constant(-10, 100, 0.5, 0.1).unwrap();
        let h = hat_l_transform(&env, 3, 0, 50).unwrap();
        for i in 0..=50 {
            assert!((h.right(i) - 2.0 / 3.0).abs() < 1e-14);
        }
        let env = sample_environment(&EnvironmentDistribution::standard(), -5, 100, 1);
        let h1 = hat_l_transform(&env, 1, 0, 50).unwrap();
        for i in 0..=50 {
            assert!((h1.right(i) - env.omega(i) * (1.0 + env.rho(i))).abs() < 1e-14);
            assert_eq!(h1.right(i), 1.0);
            assert_eq!(h1.left(i), 0.0);
        }
        assert!(matches!(
            hat_l_transform(&env, 10, 0, 5),
            Err(LabError::WindowTooShort { .. })
        ));
    }

    #[test]
    fn hat_l_decreasing_and_above_hat() {
        let d = EnvironmentDistribution::standard();
        for seed in 0..50 {
            let env = sample_environment(&d, -40, 200, seed);
            let p = build_profile(&env, 150).unwrap();
            let hat = hat_transform(&p, 120).unwrap();
            let mut prev = hat_l_transform(&env, 1, 40, 120).unwrap();
            for l in 2..=30 {
                let cur = hat_l_transform(&env, l, 40, 120).unwrap();
                for i in 40..=120 {
                    assert!(cur.right(i) < prev.right(i), "seed={seed} l={l} i={i}");
                    if i as usize > l {
                        assert!(cur.right(i) >= hat.right(i) - 1e-15);
                    }
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn cross_formula_and_limit() {
        let d = EnvironmentDistribution::standard();
        for seed in 0..100 {
            let env = sample_environment(&d, -40, 120, seed);
            let p = build_profile(&env, 60).unwrap();
            let hat = hat_transform(&p, 50).unwrap();
            for l in 1..=12usize {
                let local = hat_l_transform(&env, l, 1, 25).unwrap();
                for i in 1..=25usize {
                    let tl2 = hat_l_from_profile(&p, l, i).unwrap();
                    // the difference S(i) − S(i−L) loses digits once S has
                    // nearly converged; only well-conditioned sites are compared
                    let cond = (p.log_s(i + 1) - p.log_s(i) - crate::numerics::log1mexp(p.log_s(i - l.min(i)) - p.log_s(i)))
                        .exp();
                    if i > l && cond < 1e4 {
                        let rel = (tl2 - local.right(i as i64)).abs() / tl2;
                        assert!(rel < 1e-10, "seed={seed} l={l} i={i} rel={rel}");
                    } else if i <= l {
                        assert!((tl2 - hat.right(i as i64)).abs() < 1e-12, "i={i} l={l} {tl2} {}", hat.right(i as i64));
                    }
                }
            }
        }
    }

    #[test]
    fn shift_identity() {
        let env = Environment::constant(0, 40, 0.5, 0.1).unwrap();
        let p = build_profile(&env, 30).unwrap();
        assert!(shat_shift_check(&env, &p, 1, 1).unwrap() < 1e-14);
        assert!(shat_shift_check(&env, &p, 5, 3).unwrap() < 1e-9);
        let d = EnvironmentDistribution::standard();
        for seed in 0..300u64 {
            let env = sample_environment(&d, 0, 400, seed);
            let p = build_profile(&env, 350).unwrap();
            let a = 1 + (seed as usize * 7) % 150;
            let b = (seed as usize * 13) % 150;
            assert!(shat_shift_check(&env, &p, a, b).unwrap() < 1e-9);
        }
    }
}
