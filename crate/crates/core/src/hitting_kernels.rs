//! Exact quenched hitting-time computations on conditioned environments:
//! finite-horizon hitting probabilities, first-passage MGFs `φ` and their
//! time truncations, and the `Î` rate approximations built from them.

use serde::Serialize;

use crate::conditioned_env::{hat_l_transform, hat_transform, ConditionedEnvironment};
use crate::env_model::Environment;
use crate::error::{LabError, Result};
use crate::optimize::golden_max;
use crate::potential::{build_profile, c_kappa, xi_n};

const FLUSH: f64 = 1e-300;
const MASS_TOL: f64 = 1e-12;
const SEED_TOL: f64 = 1e-9;

/// Forward mass propagation for `P_start[τ_m ≤ k]` with absorption at `m`.
///
/// Mass that can no longer reach `m` within the remaining horizon is moved
/// to a `pruned` bucket, and entries below `1e-300` are flushed to zero and
/// accounted for, so `mass + absorbed + pruned + flushed = 1` at every step.
#[derive(Debug, Clone)]
pub struct DpKernel<'a> {
    env: &'a ConditionedEnvironment,
    target: i64,
    horizon: usize,
    time: usize,
    base: i64,
    lo: i64,
    hi: i64,
    mass: Vec<f64>,
    next: Vec<f64>,
    absorbed: f64,
    pruned: f64,
    flushed: f64,
    max_mass_error: f64,
}

/// Outcome of [`hit_prob_dp`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DpResult {
    pub p_hit: f64,
    /// Absolute error budget from flushed underflow.
    pub flushed: f64,
    /// Largest deviation of the conservation identity seen during the run.
    pub max_mass_error: f64,
}

impl<'a> DpKernel<'a> {
    pub fn new(env: &'a ConditionedEnvironment, start: i64, target: i64, horizon: usize) -> Result<Self> {
        if start >= target {
            return Err(LabError::Ordering(format!("start {start} must be below target {target}")));
        }
        env.require(start, target - 1)?;
        let base = env.lo().max(start - horizon as i64);
        let width = (target - base) as usize;
        let mut mass = vec![0.0; width];
        mass[(start - base) as usize] = 1.0;
        Ok(Self {
            env,
            target,
            horizon,
            time: 0,
            base,
            lo: start,
            hi: start,
            mass,
            next: vec![0.0; width],
            absorbed: 0.0,
            pruned: 0.0,
            flushed: 0.0,
            max_mass_error: 0.0,
        })
    }

    pub fn target(&self) -> i64 {
        self.target
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// `P[τ_m ≤ t]` at the current time.
    pub fn p_hit(&self) -> f64 {
        self.absorbed
    }

    /// Mass on sites `base ..` at the current time.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn flushed(&self) -> f64 {
        self.flushed
    }

    pub fn max_mass_error(&self) -> f64 {
        self.max_mass_error
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        if self.time >= self.horizon {
            return Ok(());
        }
        let (lo, hi) = (self.lo, self.hi);
        let base = self.base;
        let env_lo = self.env.lo();
        for v in &mut self.next[(lo - base).max(1) as usize - 1..=(hi - base) as usize] {
            *v = 0.0;
        }
        if hi + 1 < self.target {
            self.next[(hi + 1 - base) as usize] = 0.0;
        }
        let mut new_lo = hi + 1;
        let mut new_hi = lo - 1;
        for i in lo..=hi {
            let m = self.mass[(i - base) as usize];
            if m == 0.0 {
                continue;
            }
            let r = self.env.right(i) * m;
            let l = self.env.left(i) * m;
            if i + 1 == self.target {
                self.absorbed += r;
            } else {
                self.next[(i + 1 - base) as usize] += r;
                new_hi = new_hi.max(i + 1);
                new_lo = new_lo.min(i + 1);
            }
            if l > 0.0 {
                if i - 1 < base {
                    if i - 1 < env_lo {
                        return Err(LabError::Coverage(format!("walk reaches site {} below the window", i - 1)));
                    }
                    self.pruned += l;
                } else {
                    self.next[(i - 1 - base) as usize] += l;
                    new_lo = new_lo.min(i - 1);
                    new_hi = new_hi.max(i - 1);
                }
            }
        }
        self.time += 1;
        // sites farther than the remaining steps can never reach the target
        let reach = self.target - (self.horizon - self.time) as i64;
        let mut total = 0.0;
        if new_lo <= new_hi {
            for i in new_lo..=new_hi {
                let slot = &mut self.next[(i - base) as usize];
                if i < reach {
                    self.pruned += *slot;
                    *slot = 0.0;
                } else if *slot < FLUSH && *slot > 0.0 {
                    self.flushed += *slot;
                    *slot = 0.0;
                } else {
                    total += *slot;
                }
            }
            new_lo = new_lo.max(reach);
        }
        std::mem::swap(&mut self.mass, &mut self.next);
        if new_lo > new_hi {
            // nothing left in play; keep an empty range anchored at the target
            self.lo = self.target - 1;
            self.hi = self.target - 2;
        } else {
            self.lo = new_lo;
            self.hi = new_hi;
        }
        let err = (total + self.absorbed + self.pruned + self.flushed - 1.0).abs();
        self.max_mass_error = self.max_mass_error.max(err);
        if err > MASS_TOL {
            return Err(LabError::InvalidArgument(format!(
                "DP mass conservation violated by {err:e} at t={}",
                self.time
            )));
        }
        Ok(())
    }

    /// Runs to the horizon.
    pub fn run(mut self) -> Result<DpResult> {
        while self.time < self.horizon {
            if self.lo > self.hi {
                break;
            }
            self.step()?;
        }
        Ok(DpResult {
            p_hit: self.absorbed,
            flushed: self.flushed,
            max_mass_error: self.max_mass_error,
        })
    }
}

/// Exact `P^{cenv}_start[τ_m ≤ k]`.
pub fn hit_prob_dp(cenv: &ConditionedEnvironment, start: i64, m: i64, k: usize) -> Result<DpResult> {
    if m - start > k as i64 {
        cenv.require(start, m - 1)?;
        return Ok(DpResult {
            p_hit: 0.0,
            flushed: 0.0,
            max_mass_error: 0.0,
        });
    }
    DpKernel::new(cenv, start, m, k)?.run()
}

/// `φ_i = E_i[e^{λ τ_{i+1}}]` together with the convergence evidence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiValue {
    pub log_phi: f64,
    /// Left context used by the recursion (0 when exact).
    pub burn_in: usize,
    /// Disagreement of the two seeded recursions at the requested site.
    pub seed_gap: f64,
}

/// One step of `φ_i = r_i e^λ / (1 − l_i e^λ φ_{i−1})`.
#[inline]
fn phi_step(right: f64, left: f64, e_lambda: f64, prev: f64) -> f64 {
    right * e_lambda / (1.0 - left * e_lambda * prev)
}

/// True when the recursion is exact from the first site of the window.
fn anchored(cenv: &ConditionedEnvironment) -> bool {
    cenv.left(cenv.lo()) == 0.0
}

/// `log φ_i` for `i ∈ [lo, hi]` at fixed `λ ≤ 0`.
#[derive(Debug, Clone, Serialize)]
pub struct MgfTable {
    pub lambda: f64,
    pub lo: i64,
    pub log_phi: Vec<f64>,
    /// `None` for the untruncated MGF, `Some(M)` for the `τ < M` truncation.
    pub truncation: Option<f64>,
    pub burn_in: usize,
    pub seed_gap: f64,
}

impl MgfTable {
    pub fn sum(&self) -> f64 {
        self.log_phi.iter().sum()
    }
}

fn sweep_once(cenv: &ConditionedEnvironment, from: i64, lo: i64, hi: i64, e_lambda: f64, out: &mut Vec<f64>) -> f64 {
    // φ_from lies between r e^λ and e^λ, and equals r e^λ when no left step is possible
    let mut down = cenv.right(from) * e_lambda;
    let mut up = if cenv.left(from) == 0.0 { down } else { e_lambda };
    for i in from + 1..=lo {
        up = phi_step(cenv.right(i), cenv.left(i), e_lambda, up);
        down = phi_step(cenv.right(i), cenv.left(i), e_lambda, down);
    }
    let gap = (up.ln() - down.ln()).abs();
    out.clear();
    out.push(up.ln());
    let mut phi = up;
    for i in lo + 1..=hi {
        phi = phi_step(cenv.right(i), cenv.left(i), e_lambda, phi);
        out.push(phi.ln());
    }
    gap
}

/// `log φ_i(λ)` for every `i ∈ [lo, hi]` in one left-to-right pass.
///
/// On an environment whose first site never steps left (such as `ω̂`, where
/// site 1 jumps right surely) the recursion starts there and is exact.
/// Otherwise it starts `burn_in` sites left of `lo` from the two extreme
/// seeds `e^λ` and `ω e^λ`; the burn-in is doubled until both agree within
/// `1e-9` in log at `lo`, as far as the available context allows.
pub fn phi_sweep(cenv: &ConditionedEnvironment, lo: i64, hi: i64, lambda: f64, burn_in: usize) -> Result<MgfTable> {
    if lambda > 0.0 {
        return Err(LabError::InvalidArgument(format!("lambda must be ≤ 0, got {lambda}")));
    }
    cenv.require(lo, hi)?;
    let e_lambda = lambda.exp();
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    if anchored(cenv) {
        sweep_once(cenv, cenv.lo(), lo, hi, e_lambda, &mut out);
        return Ok(MgfTable {
            lambda,
            lo,
            log_phi: out,
            truncation: None,
            burn_in: 0,
            seed_gap: 0.0,
        });
    }
    let available = (lo - cenv.lo()) as usize;
    let mut b = burn_in.max(1).min(available);
    loop {
        let gap = sweep_once(cenv, lo - b as i64, lo, hi, e_lambda, &mut out);
        if gap <= SEED_TOL {
            return Ok(MgfTable {
                lambda,
                lo,
                log_phi: out,
                truncation: None,
                burn_in: b,
                seed_gap: gap,
            });
        }
        if b == available {
            return Err(LabError::ContextTooShort {
                site: lo,
                burn_in: b,
                gap,
            });
        }
        b = (2 * b).min(available);
    }
}

/// `φ_i(λ)` at a single site.
pub fn phi_site(cenv: &ConditionedEnvironment, i: i64, lambda: f64, burn_in: usize) -> Result<PhiValue> {
    let t = phi_sweep(cenv, i, i, lambda, burn_in)?;
    Ok(PhiValue {
        log_phi: t.log_phi[0],
        burn_in: t.burn_in,
        seed_gap: t.seed_gap,
    })
}

/// Largest horizon accepted by [`first_passage`]; the law is stored densely.
pub const MAX_FIRST_PASSAGE_TIME: usize = 1 << 20;

/// First-passage law `f(t) = P_i[τ_{i+1} = t]` for `t = 1, …, t_max`
/// (index 0 holds `t = 1`).
pub fn first_passage(cenv: &ConditionedEnvironment, i: i64, t_max: usize) -> Result<Vec<f64>> {
    if t_max > MAX_FIRST_PASSAGE_TIME {
        return Err(LabError::InvalidArgument(format!(
            "first-passage horizon {t_max} exceeds {MAX_FIRST_PASSAGE_TIME}"
        )));
    }
    cenv.require(i, i)?;
    let reach = (t_max / 2) as i64;
    let base = (i - reach).max(cenv.lo());
    let width = (i - base + 1) as usize;
    let mut mass = vec![0.0; width];
    let mut next = vec![0.0; width];
    mass[(i - base) as usize] = 1.0;
    let mut out = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut hit = 0.0;
        for (j, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let site = base + j as i64;
            let r = cenv.right(site) * m;
            let l = cenv.left(site) * m;
            if site == i {
                hit += r;
            } else {
                next[j + 1] += r;
            }
            if l > 0.0 {
                if j == 0 {
                    if site - 1 < cenv.lo() {
                        return Err(LabError::Coverage(format!(
                            "first passage from {i} reaches site {} below the window",
                            site - 1
                        )));
                    }
                    // site − 1 is too far left to return within t_max steps
                } else {
                    next[j - 1] += l;
                }
            }
        }
        out.push(hit);
        std::mem::swap(&mut mass, &mut next);
    }
    Ok(out)
}

/// Value and tail of the time-truncated MGF.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncatedPhi {
    /// `φ_{i,M}(λ) = E_i[e^{λτ_{i+1}} 1[τ_{i+1} < M]]`.
    pub value: f64,
    /// `P_i[τ_{i+1} ≥ M]`.
    pub tail: f64,
}

/// Number of admissible passage times: `τ < M ⇔ τ ≤ ⌈M⌉ − 1`.
fn admissible_times(m: f64) -> usize {
    (m.ceil() as usize).saturating_sub(1)
}

/// `φ_{i,M}(λ)` by a time-indexed first-passage DP up to `⌈M⌉ − 1` steps.
pub fn phi_site_truncated(cenv: &ConditionedEnvironment, i: i64, lambda: f64, m: f64) -> Result<TruncatedPhi> {
    if lambda > 0.0 || m < 1.0 {
        return Err(LabError::InvalidArgument(format!("need lambda ≤ 0 and M ≥ 1 (λ={lambda}, M={m})")));
    }
    let f = first_passage(cenv, i, admissible_times(m))?;
    Ok(truncated_from_law(&f, lambda))
}

fn truncated_from_law(f: &[f64], lambda: f64) -> TruncatedPhi {
    let mut value = 0.0;
    let mut mass = 0.0;
    for (t, &p) in f.iter().enumerate() {
        value += p * (lambda * (t + 1) as f64).exp();
        mass += p;
    }
    TruncatedPhi {
        value,
        tail: (1.0 - mass).max(0.0),
    }
}

/// Which MGF enters the `Î` sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum IHatVariant {
    /// `φ_i(ω̂, λ)` summed from `J`.
    J(usize),
    /// `φ_{i,M}(ω̂, λ)`.
    JM(usize, f64),
    /// `φ(ω̂^L, λ)` at site `i`.
    JL(usize, usize),
    /// `φ^M(ω̂^L, λ)` at site `i`.
    JML(usize, f64, usize),
}

/// Search settings for the `λ`-supremum.
#[derive(Debug, Clone, Copy)]
pub struct IHatConfig {
    pub tol: f64,
    /// Initial burn-in for `ω̂^L`; `None` means `max(64, 2L)`.
    pub burn_in: Option<usize>,
}

impl Default for IHatConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            burn_in: None,
        }
    }
}

/// Value of an `Î` functional and its maximizer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IHatResult {
    pub value: f64,
    pub lambda_star: f64,
    pub evaluations: usize,
    pub burn_in: usize,
}

/// Lower end of the `λ` bracket: `log(κ(1−x)/x) − 5`, capped at `−1` for
/// small `x` where the bound is positive and the maximizer is `λ = 0`.
pub fn lambda_bracket_lo(kappa: f64, x: f64) -> f64 {
    ((kappa * (1.0 - x) / x).ln() - 5.0).min(-1.0)
}

/// `sup_{λ ≤ 0} {λ − scale · F(λ)}` by golden section on
/// `[log(κ(1−x)/x) − 5, 0]`, with concavity checked along the way. A
/// maximizer on the lower end is reported as a bracket failure.
pub fn sup_lambda<F>(kappa: f64, x: f64, tol: f64, mut sum_log_phi: F) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let lo = lambda_bracket_lo(kappa, x);
    let r = golden_max(|l| Ok(l - sum_log_phi(l)?), lo, 0.0, tol, true)?;
    if r.at_lower(lo, tol) {
        return Err(LabError::BracketFailure {
            lo,
            hi: 0.0,
            reason: "maximizer at the lower end of the lambda bracket".into(),
        });
    }
    Ok((r.value, r.argmax, r.evaluations))
}

/// Prepared per-site data for repeated `Î` evaluations.
enum Prepared {
    Exact { cenv: ConditionedEnvironment, lo: i64, hi: i64, burn_in: usize },
    Truncated { laws: Vec<Vec<f64>> },
}

fn prepare(variant: IHatVariant, env: &Environment, x: f64, k: usize, cfg: &IHatConfig) -> Result<(Prepared, usize, usize)> {
    let xk = (x * k as f64).floor() as usize;
    let (j, l, m) = match variant {
        IHatVariant::J(j) => (j, None, None),
        IHatVariant::JM(j, m) => (j, None, Some(m)),
        IHatVariant::JL(j, l) => (j, Some(l), None),
        IHatVariant::JML(j, m, l) => (j, Some(l), Some(m)),
    };
    if !(x > 0.0 && x < 1.0) {
        return Err(LabError::InvalidArgument(format!("x must lie in (0,1), got {x}")));
    }
    if j >= xk {
        return Err(LabError::InvalidArgument(format!("need J < ⌊xk⌋ (J={j}, ⌊xk⌋={xk})")));
    }
    let (lo, hi) = (j as i64, xk as i64 - 1);
    let cenv = match l {
        None => {
            if j == 0 {
                return Err(LabError::InvalidArgument("the hat environment starts at site 1; use J ≥ 1".into()));
            }
            hat_transform(&build_profile(env, xk)?, (xk - 1).max(1) as i64)?
        }
        Some(l) => {
            let b = cfg.burn_in.unwrap_or(64.max(2 * l));
            let left = (env.lo() + l as i64 - 1).max(lo - b as i64 - (m.map_or(0, admissible_times) / 2) as i64);
            hat_l_transform(env, l, left, hi)?
        }
    };
    let burn = cfg.burn_in.unwrap_or(64.max(2 * l.unwrap_or(0)));
    let prepared = match m {
        None => Prepared::Exact { cenv, lo, hi, burn_in: burn },
        Some(m) => {
            let t = admissible_times(m);
            let laws = (lo..=hi).map(|i| first_passage(&cenv, i, t)).collect::<Result<Vec<_>>>()?;
            Prepared::Truncated { laws }
        }
    };
    Ok((prepared, xk, burn))
}

/// `Î_J`, `Î_{J,M}`, `Î^L_J` or `Î^L_{J,M}` at `(x, k)` on one environment.
///
/// The hat variants need `env` on `[1, ⌊xk⌋]`; the `L` variants need the
/// burn-in plus `L − 1` sites of context left of `J`.
pub fn i_hat(variant: IHatVariant, env: &Environment, x: f64, k: usize, cfg: &IHatConfig) -> Result<IHatResult> {
    let (prepared, _, _) = prepare(variant, env, x, k, cfg)?;
    let kf = k as f64;
    let mut used_burn = 0;
    let (value, lambda_star, evaluations) = match &prepared {
        Prepared::Exact { cenv, lo, hi, burn_in } => sup_lambda(env.kappa(), x, cfg.tol, |lam| {
            let t = phi_sweep(cenv, *lo, *hi, lam, *burn_in)?;
            used_burn = used_burn.max(t.burn_in);
            Ok(t.sum() / kf)
        })?,
        Prepared::Truncated { laws } => sup_lambda(env.kappa(), x, cfg.tol, |lam| {
            let mut s = 0.0;
            for f in laws {
                s += truncated_from_law(f, lam).value.ln();
            }
            Ok(s / kf)
        })?,
    };
    Ok(IHatResult {
        value,
        lambda_star,
        evaluations,
        burn_in: used_burn,
    })
}

/// `(1/k) Σ_{i=J}^{⌊xk⌋−1} P_i[τ_{i+1} ≥ M]` on `ω̂` (or on `ω̂^L` when `l`
/// is given).
pub fn tail_sum(env: &Environment, x: f64, k: usize, j: usize, m: f64, l: Option<usize>) -> Result<f64> {
    let variant = match l {
        None => IHatVariant::JM(j.max(1), m),
        Some(l) => IHatVariant::JML(j, m, l),
    };
    let (prepared, _, _) = prepare(variant, env, x, k, &IHatConfig::default())?;
    match prepared {
        Prepared::Truncated { laws } => {
            Ok(laws.iter().map(|f| truncated_from_law(f, 0.0).tail).sum::<f64>() / k as f64)
        }
        Prepared::Exact { .. } => unreachable!("truncated variant"),
    }
}

/// Both sides of the tail-probability bound with `a log M` an integer:
/// `(1/k) Σ_{i=1}^{⌊xk⌋−1} P^{ω̂}_i[τ_{i+1} ≥ M]` against
/// `x e^{−M^{1 + a log κ}/(a log M)} + (C_κ/k) Σ_i ξ_i(a log M, ω)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBound {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn tail_bound_check(env: &Environment, x: f64, k: usize, a: f64, m: f64) -> Result<TailBound> {
    let alm = a * m.ln();
    let alm_int = alm.round();
    if (alm - alm_int).abs() > 1e-9 || alm_int < 1.0 {
        return Err(LabError::InvalidArgument(format!("a log M = {alm} must be a positive integer")));
    }
    let depth = alm_int as usize;
    let lhs = tail_sum(env, x, k, 1, m, None)?;
    let xk = (x * k as f64).floor() as i64;
    let kappa = env.kappa();
    let first = x * (-(m.powf(1.0 + a * kappa.ln())) / alm).exp();
    let mut xi_sum = 0.0;
    for i in 1..xk {
        xi_sum += xi_n(env, i, depth)?;
    }
    Ok(TailBound {
        lhs,
        rhs: first + c_kappa(kappa) * xi_sum / k as f64,
    })
}

/// The computable form of the truncation sandwich:
/// `0 ≤ Î_{J,M} − Î_J ≤ κ^{-1} e^{λ*_M (M−1)} (1/k) Σ P[τ_{i+1} ≥ M]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncationSandwich {
    pub i_j: f64,
    pub i_jm: f64,
    pub bound: f64,
}

impl TruncationSandwich {
    pub fn holds(&self, slack: f64) -> bool {
        let d = self.i_jm - self.i_j;
        d >= -slack && d <= self.bound + slack
    }
}

pub fn truncation_sandwich(env: &Environment, x: f64, k: usize, j: usize, m: f64) -> Result<TruncationSandwich> {
    let cfg = IHatConfig::default();
    let i_j = i_hat(IHatVariant::J(j), env, x, k, &cfg)?;
    let i_jm = i_hat(IHatVariant::JM(j, m), env, x, k, &cfg)?;
    let tails = tail_sum(env, x, k, j, m, None)?;
    let bound = (i_jm.lambda_star * (m - 1.0)).exp() / env.kappa() * tails;
    Ok(TruncationSandwich {
        i_j: i_j.value,
        i_jm: i_jm.value,
        bound,
    })
}

/// Chebyshev bound `−(1/k) log P^{ω̂}_J[τ_{⌊xk⌋} ≤ k] ≥ Î_J`; returns
/// `(lhs, Î_J)`.
pub fn chebyshev_check(env: &Environment, x: f64, k: usize, j: usize) -> Result<(f64, f64)> {
    let xk = (x * k as f64).floor() as usize;
    let hat = hat_transform(&build_profile(env, xk)?, xk as i64 - 1)?;
    let p = hit_prob_dp(&hat, j as i64, xk as i64, k)?.p_hit;
    let lhs = -p.ln() / k as f64;
    let rhs = i_hat(IHatVariant::J(j), env, x, k, &IHatConfig::default())?.value;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{sample_environment, EnvironmentDistribution};

    fn hat_env(seed: u64, len: usize) -> (Environment, ConditionedEnvironment) {
        let env = sample_environment(&EnvironmentDistribution::standard(), -300, len + 400, seed);
        let p = build_profile(&env, len + 1).unwrap();
        let h = hat_transform(&p, len as i64).unwrap();
        (env, h)
    }

    /// Sum over all ±1 paths of length ≤ k.
    fn enumerate(c: &ConditionedEnvironment, start: i64, m: i64, k: usize) -> f64 {
        fn rec(c: &ConditionedEnvironment, x: i64, m: i64, left: usize, p: f64) -> f64 {
            if x == m {
                return p;
            }
            if left == 0 || p == 0.0 {
                return 0.0;
            }
            let mut s = rec(c, x + 1, m, left - 1, p * c.right(x));
            let l = c.left(x);
            if l > 0.0 {
                s += rec(c, x - 1, m, left - 1, p * l);
            }
            s
        }
        rec(c, start, m, k, 1.0)
    }

    #[test]
    fn dp_trivial_cases() {
        let (_, h) = hat_env(1, 50);
        assert_eq!(hit_prob_dp(&h, 1, 2, 1).unwrap().p_hit, 1.0);
        assert_eq!(hit_prob_dp(&h, 1, 20, 10).unwrap().p_hit, 0.0);
    }

    #[test]
    fn dp_matches_enumeration() {
        for seed in 0..10 {
            let (_, h) = hat_env(seed, 10);
            for m in 2..=6 {
                for k in 1..=12 {
                    let dp = hit_prob_dp(&h, 1, m, k).unwrap().p_hit;
                    let en = enumerate(&h, 1, m, k);
                    assert!((dp - en).abs() < 1e-14, "m={m} k={k}: {dp} vs {en}");
                }
            }
        }
    }

    #[test]
    fn dp_monotone_in_horizon() {
        let (_, h) = hat_env(3, 100);
        let mut prev = 0.0;
        for k in 30..200 {
            let p = hit_prob_dp(&h, 1, 30, k).unwrap().p_hit;
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn dp_reports_coverage() {
        let env = sample_environment(&EnvironmentDistribution::standard(), 0, 50, 1);
        let c = ConditionedEnvironment::from_environment(&env);
        assert!(matches!(hit_prob_dp(&c, 2, 20, 40), Err(LabError::Coverage(_))));
    }

    #[test]
    fn phi_closed_form_homogeneous() {
        let p0: f64 = 0.7;
        let env = Environment::constant(-500, 1000, p0, 0.1).unwrap();
        let c = ConditionedEnvironment::from_environment(&env);
        for &lam in &[-0.01, -0.3, -2.0] {
            let e = f64::exp(lam);
            let want = (1.0 - (1.0 - 4.0 * p0 * (1.0 - p0) * e * e).sqrt()) / (2.0 * (1.0 - p0) * e);
            let got = phi_site(&c, 100, lam, 64).unwrap();
            assert!((got.log_phi - want.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_trivial_cases() {
        let (_, h) = hat_env(2, 200);
        let t = phi_sweep(&h, 1, 200, 0.0, 64).unwrap();
        assert!(t.log_phi.iter().all(|v| v.abs() < 1e-12));
        let t = phi_sweep(&h, 1, 1, -0.7, 64).unwrap();
        assert!((t.log_phi[0] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn phi_hat_l_two_seed_certificate() {
        let env = sample_environment(&EnvironmentDistribution::standard(), -2000, 3000, 8);
        let c = hat_l_transform(&env, 8, -1900, 900).unwrap();
        let a = phi_sweep(&c, 100, 400, -0.2, 64).unwrap();
        let b = phi_sweep(&c, 100, 400, -0.2, 1024).unwrap();
        for (x, y) in a.log_phi.iter().zip(&b.log_phi) {
            assert!((x - y).abs() < 1e-9);
        }
        let short = hat_l_transform(&env, 8, 0, 10).unwrap();
        assert!(matches!(phi_sweep(&short, 1, 10, -1e-3, 64), Err(LabError::ContextTooShort { .. })));
    }

    #[test]
    fn truncated_phi_cases() {
        let (_, h) = hat_env(5, 200);
        for i in [1i64, 10, 50] {
            let lam = -0.4;
            let t2 = phi_site_truncated(&h, i, lam, 2.0).unwrap();
            assert!((t2.value - h.right(i) * f64::exp(lam)).abs() < 1e-15);
            let z = phi_site_truncated(&h, i, 0.0, 30.0).unwrap();
            assert!((z.value + z.tail - 1.0).abs() < 1e-13);
            let full = phi_site(&h, i, lam, 64).unwrap().log_phi.exp();
            let big = phi_site_truncated(&h, i, lam, 60.0).unwrap();
            assert!(big.value <= full + 1e-15);
            assert!(full - big.value <= big.tail + 1e-15);
            let small = phi_site_truncated(&h, i, lam, 20.0).unwrap();
            assert!(small.value <= big.value);
        }
    }

    #[test]
    fn i_hat_single_deterministic_step() {
        let env = sample_environment(&EnvironmentDistribution::standard(), -10, 60, 1);
        // ⌊xk⌋ = 2 = J + 1 with J = 1, where ω̂₁ = 1
        let r = i_hat(IHatVariant::J(1), &env, 0.02, 100, &IHatConfig::default()).unwrap();
        assert!(r.value.abs() < 1e-9);
        assert!(r.lambda_star > -1e-8);
    }

    #[test]
    fn i_hat_orderings() {
        let d = EnvironmentDistribution::standard();
        for seed in 0..10 {
            let env = sample_environment(&d, -400, 800, seed);
            let (x, k) = (0.6, 200);
            let cfg = IHatConfig::default();
            let ij = i_hat(IHatVariant::J(20), &env, x, k, &cfg).unwrap();
            let ijl = i_hat(IHatVariant::JL(20, 8), &env, x, k, &cfg).unwrap();
            assert!(ij.value >= ijl.value - 1e-9);
            let i0l = i_hat(IHatVariant::JL(0, 8), &env, x, k, &cfg).unwrap();
            let bound = 20.0 / k as f64 * (x / (0.01 * (1.0 - x))).ln();
            assert!((ijl.value - i0l.value).abs() <= bound);
            let (lhs, rhs) = chebyshev_check(&env, x, k, 1).unwrap();
            assert!(lhs >= rhs - 1e-9);
        }
    }

    #[test]
    fn truncation_and_tail_bounds() {
        let d = EnvironmentDistribution::standard();
        for seed in 0..5 {
            let env = sample_environment(&d, -400, 800, seed);
            let s = truncation_sandwich(&env, 0.6, 200, 30, 1f64.exp().powi(3)).unwrap();
            assert!(s.holds(1e-9), "{s:?}");
            for &m in &[2f64.exp(), 3f64.exp()] {
                let b = tail_bound_check(&env, 0.6, 200, 2.0, m).unwrap();
                assert!(b.lhs <= b.rhs, "{b:?}");
            }
        }
    }
}
