//! Randomized invariant checks. Each check draws its instances from a fixed
//! seed and reports the number of violations and the worst residual.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditioned_env::{hat_l_from_profile, hat_l_transform, hat_transform, shat_shift_check};
use crate::env_model::{
    ballistic_summary, sample_environment_with, Atom, Environment, EnvironmentDistribution, SampleOptions,
};
use crate::hitting_kernels::{
    chebyshev_check, hit_prob_dp, i_hat, tail_bound_check, truncation_sandwich, IHatConfig, IHatVariant,
};
use crate::numerics::{logaddexp, mean_stderr};
use crate::potential::{build_profile, delta_eps, hit_prob_ratio, w_bound, w_value, PotentialProfile};
use crate::quenched_walk::{simulate_with, StopRule, WalkOptions};
use crate::rate_functions::{
    block_bootstrap_stderr, i_f_ladder, ladder_is_monotone, legendre, min_ratio_s, IfConfig, IncrementLaw,
    ProductMeasure,
};
use crate::rng::{stream, stream_rng, TAG_AUX, TAG_WALK};

/// Outcome of one randomized check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Largest residual seen, in the check's own units.
    pub worst: f64,
    /// Instances that could not be evaluated.
    pub errors: usize,
    pub note: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0 && self.instances > 0
    }
}

struct Tally {
    name: String,
    instances: usize,
    violations: usize,
    worst: f64,
    errors: usize,
    note: String,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            violations: 0,
            worst: 0.0,
            errors: 0,
            note: String::new(),
        }
    }

    /// Records a residual that must not exceed `tol`.
    fn residual(&mut self, r: f64, tol: f64) {
        self.instances += 1;
        if r.is_nan() || r > tol {
            self.violations += 1;
        }
        if r.is_nan() || r > self.worst {
            self.worst = r;
        }
    }

    fn outcome<T>(&mut self, r: crate::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.instances += 1;
                self.errors += 1;
                if self.note.is_empty() {
                    self.note = e.to_string();
                }
                None
            }
        }
    }

    fn done(self) -> CheckResult {
        CheckResult {
            name: self.name,
            instances: self.instances,
            violations: self.violations,
            worst: self.worst,
            errors: self.errors,
            note: self.note,
        }
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    stream_rng(seed, stream(salt, TAG_AUX))
}

/// A random ballistic law with two or three atoms in `[κ, 1 − κ]`, at least
/// one of them with `ρ > 1`.
pub fn random_ballistic(rng: &mut impl Rng) -> EnvironmentDistribution {
    let kappa = 0.1;
    loop {
        let n = rng.gen_range(2..=3);
        let mut atoms: Vec<Atom> = (0..n)
            .map(|_| Atom {
                omega: rng.gen_range(kappa..1.0 - kappa),
                weight: rng.gen_range(0.05..1.0),
            })
            .collect();
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        atoms.iter_mut().for_each(|a| a.weight /= total);
        let fix: f64 = atoms[..n - 1].iter().map(|a| a.weight).sum();
        atoms[n - 1].weight = 1.0 - fix;
        let Ok(d) = EnvironmentDistribution::new(atoms, kappa) else { continue };
        if d.mean_rho() < 0.97 && d.atoms().iter().any(|a| a.rho() > 1.0) {
            return d;
        }
    }
}

fn env_for(dist: &EnvironmentDistribution, lo: i64, len: usize, seed: u64, replica: u64) -> Environment {
    sample_environment_with(dist, lo, len, seed, SampleOptions { replica, antithetic: false })
}

/// `S(n) = S(m) + e^{V(m)} S(n − m, θ^m ω)` in log form. With `corrupt`,
/// the tested `log S(n)` is perturbed by `1e-6` first.
pub fn sdecomp(instances: usize, seed: u64, corrupt: bool) -> CheckResult {
    let mut t = Tally::new("S decomposition");
    let d = EnvironmentDistribution::standard();
    let mut rng = rng_for(seed, 1);
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 600, seed, r);
        let m = rng.gen_range(0..250usize);
        let n = m + rng.gen_range(1..250usize);
        let Some(mut p) = t.outcome(build_profile(&env, 500)) else { continue };
        if corrupt {
            p = p.with_perturbed_log_s(n, 1e-6);
        }
        let Some(shifted) = t.outcome(PotentialProfile::build(&env, m as i64, n - m)) else { continue };
        let rhs = logaddexp(p.log_s(m), p.v(m) + shifted.log_s(n - m));
        t.residual((p.log_s(n) - rhs).abs(), 1e-9);
    }
    t.done()
}

/// The closed form of `S(a, θ^b ω̂)`.
pub fn shift_identity(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("hat-S shift identity");
    let d = EnvironmentDistribution::standard();
    let mut rng = rng_for(seed, 2);
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 400, seed, r);
        let a = rng.gen_range(1..150usize);
        let b = rng.gen_range(0..150usize);
        let Some(p) = t.outcome(build_profile(&env, 350)) else { continue };
        if let Some(res) = t.outcome(shat_shift_check(&env, &p, a, b)) {
            t.residual(res, 1e-9);
        }
    }
    t.done()
}

/// `1/W(n) = (1 + 1/W(n−1))/ρ_n` in log form. With `reduced`, profiles are
/// rounded to single precision first.
pub fn w_recursion(instances: usize, seed: u64, reduced: bool) -> CheckResult {
    let mut t = Tally::new("W recursion");
    let d = EnvironmentDistribution::standard();
    let mut rng = rng_for(seed, 3);
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 400, seed, r);
        let Some(mut p) = t.outcome(build_profile(&env, 300)) else { continue };
        if reduced {
            p = p.to_reduced_precision();
        }
        let n = rng.gen_range(2..=300usize);
        let lhs = -p.log_w(n);
        let rhs = logaddexp(0.0, -p.log_w(n - 1)) - env.log_rho(n as i64);
        t.residual((lhs - rhs).abs(), 1e-9);
    }
    t.done()
}

/// `max_{j<n} V(j) ≤ log S(n) ≤ log n + max_{j<n} V(j)`.
pub fn eqs_sandwich(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("S max-potential sandwich");
    let d = EnvironmentDistribution::standard();
    let mut rng = rng_for(seed, 4);
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 400, seed, r);
        let Some(p) = t.outcome(build_profile(&env, 300)) else { continue };
        let n = rng.gen_range(1..=300usize);
        let vmax = (0..n).map(|j| p.v(j)).fold(f64::NEG_INFINITY, f64::max);
        let ls = p.log_s(n);
        t.residual((vmax - ls).max(ls - (n as f64).ln() - vmax).max(0.0), 1e-9);
    }
    t.done()
}

/// `ω̂₁ = 1`.
pub fn hat_site_one(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("hat omega_1 = 1");
    let mut rng = rng_for(seed, 5);
    for r in 0..instances as u64 {
        let d = random_ballistic(&mut rng);
        let env = env_for(&d, 0, 60, seed, r);
        let Some(p) = t.outcome(build_profile(&env, 50)) else { continue };
        if let Some(h) = t.outcome(hat_transform(&p, 40)) {
            t.residual((h.right(1) - 1.0).abs() + h.left(1), 0.0);
        }
    }
    t.done()
}

/// Walks from `x` exit `(0, y)` on the right with probability `S(x)/S(y)`.
/// The residual is the binomial z-score; the tolerance is 4.
pub fn hitting_ratio_mc(instances: usize, walks: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("exit probability S(x)/S(y)");
    let mut rng = rng_for(seed, 6);
    for r in 0..instances as u64 {
        let d = if r % 2 == 0 { EnvironmentDistribution::standard() } else { random_ballistic(&mut rng) };
        let x = rng.gen_range(1..=8usize);
        let y = x + rng.gen_range(1..=25usize);
        let env = env_for(&d, 0, y + 2, seed, r);
        let Some(p) = t.outcome(build_profile(&env, y)) else { continue };
        let Some(want) = t.outcome(hit_prob_ratio(&p, x, y)) else { continue };
        let mut g = stream_rng(seed, stream(r, TAG_WALK));
        let opts = WalkOptions::default();
        let stop = StopRule::ExitInterval { lo: 0, hi: y as i64 };
        let mut hits = 0usize;
        for _ in 0..walks {
            match simulate_with(&env, x as i64, stop, &mut g, &opts) {
                Ok((traj, _)) => hits += usize::from(traj.final_position == y as i64),
                Err(e) => {
                    t.outcome::<()>(Err(e));
                    break;
                }
            }
        }
        let phat = hits as f64 / walks as f64;
        let sd = (want * (1.0 - want) / walks as f64).sqrt();
        let z = if sd > 0.0 { (phat - want).abs() / sd } else { (phat - want).abs() * 1e12 };
        t.residual(z, 4.0);
    }
    t.done()
}

fn enumerate_paths(c: &crate::conditioned_env::ConditionedEnvironment, x: i64, m: i64, left: usize, p: f64) -> f64 {
    if x == m {
        return p;
    }
    if left == 0 || p == 0.0 {
        return 0.0;
    }
    let mut s = enumerate_paths(c, x + 1, m, left - 1, p * c.right(x));
    let l = c.left(x);
    if l > 0.0 {
        s += enumerate_paths(c, x - 1, m, left - 1, p * l);
    }
    s
}

/// `hit_prob_dp` against exhaustive path enumeration for `m ≤ 6`, `k ≤ 12`.
pub fn dp_enumeration(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("DP vs path enumeration");
    let mut rng = rng_for(seed, 7);
    for r in 0..instances as u64 {
        let d = if r % 2 == 0 { EnvironmentDistribution::standard() } else { random_ballistic(&mut rng) };
        let env = env_for(&d, 0, 20, seed, r);
        let Some(p) = t.outcome(build_profile(&env, 12)) else { continue };
        let Some(h) = t.outcome(hat_transform(&p, 10)) else { continue };
        let mut worst: f64 = 0.0;
        for m in 2..=6i64 {
            for k in 1..=12usize {
                match hit_prob_dp(&h, 1, m, k) {
                    Ok(dp) => worst = worst.max((dp.p_hit - enumerate_paths(&h, 1, m, k, 1.0)).abs()),
                    Err(_) => worst = f64::NAN,
                }
            }
        }
        t.residual(worst, 1e-14);
    }
    t.done()
}

/// `inf_{z>0} I_m(z)/z` equals the root `s` of `Λ`, including the
/// closed-form case `s = 2`.
pub fn min_ratio_equals_s(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("min I_m(z)/z equals s");
    let mut rng = rng_for(seed, 8);
    let closed = EnvironmentDistribution::standard();
    t.residual((min_ratio_s(&closed).value.as_f64() - 2.0).abs(), 1e-6);
    for _ in 1..instances {
        let d = random_ballistic(&mut rng);
        let Some(b) = t.outcome(ballistic_summary(&d)) else { continue };
        let s = b.lambda_root_s.as_f64();
        t.residual((min_ratio_s(&d).value.as_f64() - s).abs(), 1e-6);
    }
    t.done()
}

/// `|Λ'(λ*) − z| < 1e-6` for Cramér and `I_m`, derivative by centered
/// differences.
pub fn legendre_duality(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("Legendre duality");
    let mut rng = rng_for(seed, 9);
    for i in 0..instances {
        let law = if i % 2 == 0 {
            let n = rng.gen_range(2..=4);
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            let fix: f64 = w[..n - 1].iter().sum();
            w[n - 1] = 1.0 - fix;
            IncrementLaw::new(vals, w).unwrap()
        } else {
            IncrementLaw::from_log_rho(&random_ballistic(&mut rng))
        };
        let (lo, hi) = (law.min(), law.max());
        if hi - lo < 1e-3 {
            continue;
        }
        let z = lo + (hi - lo) * rng.gen_range(0.05..0.95);
        let l = legendre(&law, z);
        let h = 1e-5;
        let d = (law.log_mgf(l.lambda_star + h) - law.log_mgf(l.lambda_star - h)) / (2.0 * h);
        t.residual((d - z).abs(), 1e-6);
    }
    t.done()
}

/// `W(n) ≤ ((1−2κ)/κ)(1 − (κ/(1−κ))^n)^{-1} ≤ (1−κ)/κ`.
pub fn w_bound_check(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("W bound");
    let mut rng = rng_for(seed, 10);
    for r in 0..instances as u64 {
        let d = random_ballistic(&mut rng);
        let env = env_for(&d, 0, 320, seed, r);
        let Some(p) = t.outcome(build_profile(&env, 300)) else { continue };
        let kappa = d.kappa();
        let mut worst: f64 = 0.0;
        for n in 1..=300 {
            let b = w_bound(kappa, n);
            worst = worst.max(w_value(&p, n) / b - 1.0).max(b / ((1.0 - kappa) / kappa) - 1.0);
        }
        t.residual(worst.max(0.0), 1e-12);
    }
    t.done()
}

/// Both sides of the `Δ_ε` sandwich for `−(1/k) log(S(xk)/S(ck))`.
pub fn delta_sandwich(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("Delta_eps sandwich");
    let d = EnvironmentDistribution::standard();
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 801, seed, r);
        if let Some(de) = t.outcome(delta_eps(&env, 200, 0.5, 4.0, 0.05)) {
            let gap = (de.lower - de.target).max(de.target - de.upper).max(0.0);
            t.residual(gap, 1e-12);
        }
    }
    t.done()
}

/// `log ρ_x(ω̂^L) ≤ log ρ_x(ω̂) ≤ log ρ_x(ω)` for `x > L` on every sample,
/// and the averaged form `E log ρ(ω̂^L) ≤ E log ρ_x(ω̂) ≤ E log ρ₀` with
/// block-bootstrap error bars (violation only beyond 3 standard errors).
pub fn drift_comparison(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("drift comparison");
    let d = EnvironmentDistribution::standard();
    let (l, x) = (8usize, 20i64);
    let mut a = Vec::with_capacity(instances);
    let mut b = Vec::with_capacity(instances);
    for r in 0..instances as u64 {
        let env = env_for(&d, -20, 60, seed, r);
        let Some(p) = t.outcome(build_profile(&env, 30)) else { continue };
        let Some(h) = t.outcome(hat_transform(&p, 25)) else { continue };
        let Some(hl) = t.outcome(hat_l_transform(&env, l, x, x)) else { continue };
        let (la, lb, lc) = (hl.log_rho(x), h.log_rho(x), env.log_rho(x));
        t.residual((la - lb).max(lb - lc).max(0.0), 1e-12);
        a.push(la);
        b.push(lb);
    }
    if b.len() >= 20 {
        let mu = d.mean_log_rho();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let (md, _) = mean_stderr(&diff);
        let sd = block_bootstrap_stderr(&diff, 20, 500, seed);
        let (mb, _) = mean_stderr(&b);
        let sb = block_bootstrap_stderr(&b, 20, 500, seed);
        t.residual((md / sd.max(1e-300)).max(0.0), 3.0);
        t.residual(((mb - mu) / sb.max(1e-300)).max(0.0), 3.0);
        t.note = format!("E[a−b]={md:.4e}±{sd:.1e}, E[b]−μ={:.4e}±{sb:.1e}", mb - mu);
    }
    t.done()
}

/// The tail-probability bound with `a = 2`, `M ∈ {e², e³}`.
pub fn tail_bound(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("tail bound");
    let d = EnvironmentDistribution::standard();
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 400, seed, r);
        for m in [2f64.exp(), 3f64.exp()] {
            if let Some(b) = t.outcome(tail_bound_check(&env, 0.6, 200, 2.0, m)) {
                t.residual((b.lhs - b.rhs).max(0.0), 0.0);
            }
        }
    }
    t.done()
}

/// `0 ≤ Î_{J,M} − Î_J ≤ κ^{-1} e^{λ*_M(M−1)} (1/k) Σ P[τ ≥ M]`.
pub fn truncation(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("truncation sandwich");
    let d = EnvironmentDistribution::standard();
    let mut rng = rng_for(seed, 11);
    for r in 0..instances as u64 {
        let env = env_for(&d, 0, 500, seed, r);
        let x = rng.gen_range(0.3..0.9);
        let m = [2f64.exp(), 3f64.exp(), 30.0][r as usize % 3];
        if let Some(s) = t.outcome(truncation_sandwich(&env, x, 200, 30, m)) {
            let diff = s.i_jm - s.i_j;
            t.residual((-diff).max(diff - s.bound).max(0.0), 1e-9);
        }
    }
    t.done()
}

/// `|Î_J^L − Î_0^L| ≤ (J/k) log(x/(κ²(1−x)))` for `J > L`, and
/// `Î_J ≥ Î_J^L`.
pub fn j_to_zero(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("J-shift and hat vs hat-L");
    let d = EnvironmentDistribution::standard();
    let mut rng = rng_for(seed, 12);
    let cfg = IHatConfig::default();
    for r in 0..instances as u64 {
        let env = env_for(&d, -600, 1400, seed, r);
        let x = rng.gen_range(0.3..0.9);
        let k = rng.gen_range(100..=400usize);
        let l = rng.gen_range(2..=16usize);
        let j = l + rng.gen_range(1..=20usize);
        let kappa = d.kappa();
        let (Some(ijl), Some(i0l), Some(ij)) = (
            t.outcome(i_hat(IHatVariant::JL(j, l), &env, x, k, &cfg)),
            t.outcome(i_hat(IHatVariant::JL(0, l), &env, x, k, &cfg)),
            t.outcome(i_hat(IHatVariant::J(j), &env, x, k, &cfg)),
        ) else {
            continue;
        };
        let bound = j as f64 / k as f64 * (x / (kappa * kappa * (1.0 - x))).ln();
        t.residual(((ijl.value - i0l.value).abs() - bound).max(ijl.value - ij.value).max(0.0), 1e-9);
    }
    t.done()
}

/// `−(1/k) log P^{ω̂}_J[τ_{⌊xk⌋} ≤ k] ≥ Î_J`.
pub fn chebyshev(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("Chebyshev bound");
    let mut rng = rng_for(seed, 13);
    for r in 0..instances as u64 {
        let d = if r % 2 == 0 { EnvironmentDistribution::standard() } else { random_ballistic(&mut rng) };
        let x = rng.gen_range(0.2..0.9);
        let k = rng.gen_range(50..=400usize);
        let j = rng.gen_range(1..=5usize);
        let env = env_for(&d, 0, k + 10, seed, r);
        if let Some((lhs, rhs)) = t.outcome(chebyshev_check(&env, x, k, j)) {
            t.residual((rhs - lhs).max(0.0), 1e-9);
        }
    }
    t.done()
}

/// `ω̂^L_i` nonincreasing in `L`, and `ω̂^L_i ≥ ω̂_i` for `i > L`.
pub fn hat_l_monotone(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("hat-L monotone in L");
    let mut rng = rng_for(seed, 14);
    for r in 0..instances as u64 {
        let d = if r % 2 == 0 { EnvironmentDistribution::standard() } else { random_ballistic(&mut rng) };
        let env = env_for(&d, -40, 200, seed, r);
        let Some(p) = t.outcome(build_profile(&env, 120)) else { continue };
        let i = rng.gen_range(2..100i64);
        let mut worst: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for l in 1..=32usize {
            let Some(h) = t.outcome(hat_l_transform(&env, l, i, i)) else { break };
            let v = h.right(i);
            worst = worst.max(v - prev);
            prev = v;
            if (i as usize) > l {
                if let Ok(hat) = hat_l_from_profile(&p, i as usize, i as usize) {
                    worst = worst.max(hat - v);
                }
            }
        }
        t.residual(worst.max(0.0), 1e-12);
    }
    t.done()
}

/// `I^φ_L` nondecreasing in `L` on a fixed sample.
pub fn i_phi_monotone(instances: usize, seed: u64) -> CheckResult {
    let mut t = Tally::new("I_L^phi monotone in L");
    let q = ProductMeasure::of(&EnvironmentDistribution::standard());
    let mut rng = rng_for(seed, 15);
    for r in 0..instances as u64 {
        let x = rng.gen_range(0.2..0.9);
        let cfg = IfConfig {
            n_sites: 3000,
            seed: seed.wrapping_add(r),
            ..IfConfig::default()
        };
        if let Some(ladder) = t.outcome(i_f_ladder(x, &q, &[1, 2, 4, 8, 16, 32, 64], &cfg)) {
            let worst = ladder
                .windows(2)
                .map(|w| w[0].value - w[1].value)
                .fold(0.0f64, f64::max);
            debug_assert_eq!(ladder_is_monotone(&ladder, 1e-12), worst <= 1e-12);
            t.residual(worst, 1e-12);
        }
    }
    t.done()
}

/// Sizes for [`run_battery`].
#[derive(Debug, Clone, Copy)]
pub struct BatterySizes {
    pub identities: usize,
    pub mc_instances: usize,
    pub mc_walks: usize,
    pub inequalities: usize,
}

impl BatterySizes {
    pub fn scaled(instances: usize) -> Self {
        Self {
            identities: instances,
            mc_instances: 4,
            mc_walks: 4000,
            inequalities: instances.max(4) / 4,
        }
    }
}

/// The whole suite, in a fixed order.
pub fn run_battery(sizes: BatterySizes, seed: u64, corrupt: bool, reduced: bool) -> Vec<CheckResult> {
    let n = sizes.identities;
    let m = sizes.inequalities;
    vec![
        sdecomp(n, seed, corrupt),
        shift_identity(n, seed),
        w_recursion(n, seed, reduced),
        eqs_sandwich(n, seed),
        hat_site_one(n, seed),
        hitting_ratio_mc(sizes.mc_instances, sizes.mc_walks, seed),
        dp_enumeration(m, seed),
        min_ratio_equals_s(m.max(2), seed),
        legendre_duality(n, seed),
        w_bound_check(m, seed),
        delta_sandwich(m, seed),
        drift_comparison(n.max(40), seed),
        tail_bound(m, seed),
        truncation(m, seed),
        j_to_zero(m, seed),
        chebyshev(m, seed),
        hat_l_monotone(m, seed),
        i_phi_monotone(2, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_passes_and_controls_trip() {
        let res = run_battery(BatterySizes::scaled(12), 5, false, false);
        for r in &res {
            eprintln!("{r:?}");
        }
        for r in &res {
            assert!(r.passed(), "{r:?}");
        }
        assert!(!sdecomp(5, 5, true).passed());
        assert!(!w_recursion(5, 5, true).passed());
    }
}
