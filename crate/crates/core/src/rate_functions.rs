//! The rate-function hierarchy: Cramér rates of finite increment laws, the
//! Legendre transform `I_m` of `Λ`, the scalar `s` as `inf I_m(z)/z`, the
//! conditioned rate `I^F(x, q)` for product laws `q`, the restricted `I*`
//! and the increment limit `x*(A)`.

use std::io::Write;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioned_env::hat_l_transform;
use crate::env_model::{ballistic_summary, sample_environment, EnvironmentDistribution};
use crate::error::{LabError, Result};
use crate::hitting_kernels::{phi_sweep, sup_lambda};
use crate::numerics::{logsumexp, Extended};
use crate::optimize::{golden_max, nelder_mead};
use crate::potential::csv_err;
use crate::rng::{stream_rng, TAG_AUX};

/// A finite law on the real line, used for walk increments and for `log ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl IncrementLaw {
    /// Values need not be sorted; equal values are merged.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(LabError::InvalidDistribution("values and probabilities must pair up".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 || probs.iter().any(|p| !(*p >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidDistribution(format!("bad increment law (total mass {total})")));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(probs).filter(|(_, p)| *p > 0.0).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Ok(Self {
            values: merged.iter().map(|m| m.0).collect(),
            probs: merged.iter().map(|m| m.1).collect(),
        })
    }

    /// `±1` with equal probability.
    pub fn fair_coin() -> Self {
        Self::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    /// `+1` w.p. `p`, `−1` otherwise.
    pub fn biased_coin(p: f64) -> Result<Self> {
        Self::new(vec![-1.0, 1.0], vec![1.0 - p, p])
    }

    /// The law of `log ρ₀` under `dist`.
    pub fn from_log_rho(dist: &EnvironmentDistribution) -> Self {
        let atoms = dist.atoms();
        Self::new(atoms.iter().map(|a| a.log_rho()).collect(), atoms.iter().map(|a| a.weight).collect())
            .expect("a valid distribution has a valid log-rho law")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    /// `log E e^{tX}`.
    pub fn log_mgf(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let terms: Vec<f64> = self.values.iter().zip(&self.probs).map(|(v, p)| p.ln() + t * v).collect();
        logsumexp(&terms)
    }

    /// Tilted mean `d/dt log E e^{tX}`.
    pub fn log_mgf_derivative(&self, t: f64) -> f64 {
        let l = self.log_mgf(t);
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| (p.ln() + t * v - l).exp() * v)
            .sum()
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, rng: &mut impl RngCore) -> f64 {
        let u = crate::rng::uniform(rng);
        let mut acc = 0.0;
        for (v, p) in self.values.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *v;
            }
        }
        self.max()
    }
}

/// Value of a Legendre transform and the optimizing slope (`±∞` at the edges
/// of the support, NaN outside it).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Legendre {
    pub value: f64,
    pub lambda_star: f64,
}

/// `sup_t {t z − log E e^{tX}}`.
///
/// The bracket `[0, b]` (or `[b, 0]`) is doubled until the tilted mean
/// crosses `z`, then searched by golden section.
pub fn legendre(law: &IncrementLaw, z: f64) -> Legendre {
    let scale = 1.0 + z.abs().max(law.max().abs()).max(law.min().abs());
    let edge = 1e-13 * scale;
    let (lo, hi) = (law.min(), law.max());
    if z < lo - edge || z > hi + edge {
        return Legendre {
            value: f64::INFINITY,
            lambda_star: f64::NAN,
        };
    }
    if (z - hi).abs() <= edge {
        let p = law.probs[law.probs.len() - 1];
        return Legendre {
            value: -p.ln(),
            lambda_star: if lo == hi { 0.0 } else { f64::INFINITY },
        };
    }
    if (z - lo).abs() <= edge {
        return Legendre {
            value: -law.probs[0].ln(),
            lambda_star: f64::NEG_INFINITY,
        };
    }
    let mean = law.mean();
    if z == mean {
        return Legendre {
            value: 0.0,
            lambda_star: 0.0,
        };
    }
    let dir = (z - mean).signum();
    let mut b = dir;
    while (law.log_mgf_derivative(b) - z) * dir < 0.0 && b.abs() < 1e8 {
        b *= 2.0;
    }
    let (a, c) = if dir > 0.0 { (0.0, b) } else { (b, 0.0) };
    let r = golden_max(|t| Ok(t * z - law.log_mgf(t)), a, c, 1e-12 * b.abs(), false)
        .expect("finite bracket");
    Legendre {
        value: r.value.max(0.0),
        lambda_star: r.argmax,
    }
}

/// Cramér rate `I(x)`; `+∞` outside the convex hull of the support.
pub fn cramer_rate(law: &IncrementLaw, x: f64) -> f64 {
    legendre(law, x).value
}

/// `A_α = 1/I(α)`, the window constant of the classical law.
pub fn a_alpha(law: &IncrementLaw, alpha: f64) -> Result<f64> {
    let i = cramer_rate(law, alpha);
    if !(i > 0.0 && i.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "I({alpha}) = {i}; alpha must lie strictly between the mean and the support maximum"
        )));
    }
    Ok(1.0 / i)
}

/// `I_m(z) = sup_λ {λ z − Λ(λ)}`, `Λ(λ) = log E ρ₀^λ`.
pub fn i_m(dist: &EnvironmentDistribution, z: f64) -> Legendre {
    legendre(&IncrementLaw::from_log_rho(dist), z)
}

/// Result of [`min_ratio_s`].
#[derive(Debug, Clone, Serialize)]
pub struct MinRatio {
    pub value: Extended,
    pub argmin_z: Option<f64>,
    /// `(θ, Λ(θ))` samples showing `Λ < 0` when the value is infinite.
    pub certificate: Vec<(f64, f64)>,
}

/// `inf_{z>0} I_m(z)/z` over a log-spaced grid with golden-section
/// refinement around the best grid point.
pub fn min_ratio_s(dist: &EnvironmentDistribution) -> MinRatio {
    let law = IncrementLaw::from_log_rho(dist);
    let zmax = law.max();
    if zmax <= 0.0 {
        let certificate = (0..12)
            .map(|j| {
                let theta = 2f64.powi(j);
                (theta, law.log_mgf(theta))
            })
            .collect();
        return MinRatio {
            value: Extended::PosInfinity,
            argmin_z: None,
            certificate,
        };
    }
    let ratio = |z: f64| legendre(&law, z).value / z;
    const N: usize = 240;
    let grid: Vec<f64> = (0..=N).map(|j| zmax * 10f64.powf(-6.0 + 6.0 * j as f64 / N as f64)).collect();
    let vals: Vec<f64> = grid.iter().map(|&z| ratio(z)).collect();
    let best = (0..=N).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let (a, b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(N)]);
    let r = golden_max(|z| Ok(-ratio(z)), a, b, 1e-13 * zmax, false).expect("finite bracket");
    let (z, v) = if -r.value < vals[best] { (r.argmax, -r.value) } else { (grid[best], vals[best]) };
    MinRatio {
        value: Extended::Finite(v),
        argmin_z: Some(z),
        certificate: Vec::new(),
    }
}

/// `KL(q | p)` per site; `+∞` if `q` charges an atom outside `p`'s support.
pub fn kl_per_site(q: &EnvironmentDistribution, p: &EnvironmentDistribution) -> f64 {
    let mut kl = 0.0;
    for a in q.atoms() {
        match p.atoms().iter().find(|b| b.omega == a.omega) {
            Some(b) => kl += a.weight * (a.weight / b.weight).ln(),
            None => return f64::INFINITY,
        }
    }
    kl.max(0.0)
}

/// A product law `q^ℤ` on the atoms of a base law `p`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductMeasure {
    base: EnvironmentDistribution,
    weights: Vec<f64>,
    #[serde(skip)]
    dist: EnvironmentDistribution,
    kl: f64,
}

impl ProductMeasure {
    /// `weights` follow the atom order of `base` and may contain zeros.
    pub fn new(base: &EnvironmentDistribution, weights: &[f64]) -> Result<Self> {
        let dist = base.with_weights(weights)?;
        let kl = kl_per_site(&dist, base);
        Ok(Self {
            base: base.clone(),
            weights: weights.to_vec(),
            dist,
            kl,
        })
    }

    /// `q = p`.
    pub fn of(base: &EnvironmentDistribution) -> Self {
        let w: Vec<f64> = base.atoms().iter().map(|a| a.weight).collect();
        Self::new(base, &w).expect("base weights are valid")
    }

    pub fn base(&self) -> &EnvironmentDistribution {
        &self.base
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dist(&self) -> &EnvironmentDistribution {
        &self.dist
    }

    pub fn kl_per_site(&self) -> f64 {
        self.kl
    }
}

/// Settings for the ergodic-average estimator of `I^F`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IfConfig {
    pub l: usize,
    pub n_sites: usize,
    /// Initial φ burn-in; `None` means `max(64, 2L)`.
    pub burn_in: Option<usize>,
    pub seed: u64,
    pub blocks: usize,
    pub bootstrap: usize,
    pub tol: f64,
}

impl Default for IfConfig {
    fn default() -> Self {
        Self {
            l: 64,
            n_sites: 20_000,
            burn_in: None,
            seed: 1,
            blocks: 40,
            bootstrap: 400,
            tol: 1e-10,
        }
    }
}

/// Estimate of `I^F(x, q)` at finite `L`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IfEstimate {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
    pub lambda_star: f64,
    pub l: usize,
    pub n_sites: usize,
    pub burn_in: usize,
    pub evaluations: usize,
}

/// `sup_{λ≤0} {λ − x · (1/n) Σ_i log φ(ω̂^L, λ, i)}` over `n_sites` sites of
/// one `q`-sample. The standard error comes from a block bootstrap of the
/// per-site `log φ(λ*)` values.
pub fn i_f(x: f64, q: &ProductMeasure, cfg: &IfConfig) -> Result<IfEstimate> {
    if !(x > 0.0 && x < 1.0) {
        return Err(LabError::InvalidArgument(format!("x must lie in (0,1), got {x}")));
    }
    if cfg.l == 0 || cfg.n_sites == 0 {
        return Err(LabError::InvalidArgument("need L ≥ 1 and n_sites ≥ 1".into()));
    }
    let l = cfg.l;
    let b0 = cfg.burn_in.unwrap_or(64.max(2 * l));
    let context = 8 * b0;
    let n = cfg.n_sites;
    let env = sample_environment(q.dist(), -(context as i64) - l as i64, n + context + l, cfg.seed);
    let cenv = hat_l_transform(&env, l, -(context as i64), n as i64 - 1)?;
    let nf = n as f64;
    let mut burn = 0;
    let (value, lambda_star, evaluations) = sup_lambda(env.kappa(), x, cfg.tol, |lam| {
        let t = phi_sweep(&cenv, 0, n as i64 - 1, lam, b0)?;
        burn = burn.max(t.burn_in);
        Ok(x * t.sum() / nf)
    })?;
    let at_star = phi_sweep(&cenv, 0, n as i64 - 1, lambda_star, b0)?;
    let stderr = x * block_bootstrap_stderr(&at_star.log_phi, cfg.blocks, cfg.bootstrap, cfg.seed);
    Ok(IfEstimate {
        x,
        value,
        stderr,
        lambda_star,
        l,
        n_sites: n,
        burn_in: burn,
        evaluations,
    })
}

/// Bootstrap standard error of the mean of `xs` resampling contiguous blocks.
pub fn block_bootstrap_stderr(xs: &[f64], blocks: usize, resamples: usize, seed: u64) -> f64 {
    let blocks = blocks.min(xs.len()).max(1);
    let size = xs.len() / blocks;
    if blocks < 2 || size == 0 {
        return f64::INFINITY;
    }
    let means: Vec<f64> = (0..blocks)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let mut rng = stream_rng(seed, TAG_AUX);
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut s = 0.0;
            for _ in 0..blocks {
                s += means[(rng.next_u64() % blocks as u64) as usize];
            }
            s / blocks as f64
        })
        .collect();
    let m = stats.iter().sum::<f64>() / stats.len() as f64;
    (stats.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (stats.len() - 1).max(1) as f64).sqrt()
}

/// `I^φ_L` for each `L` in `ls` on the same sample.
pub fn i_f_ladder(x: f64, q: &ProductMeasure, ls: &[usize], cfg: &IfConfig) -> Result<Vec<IfEstimate>> {
    ls.iter()
        .map(|&l| i_f(x, q, &IfConfig { l, ..*cfg }))
        .collect()
}

/// True when the ladder values are nondecreasing in `L` up to `slack`.
pub fn ladder_is_monotone(ladder: &[IfEstimate], slack: f64) -> bool {
    ladder.windows(2).all(|w| w[1].value >= w[0].value - slack)
}

/// Settings for the restricted minimization defining `I*`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IStarConfig {
    pub i_f: IfConfig,
    pub grid_step: f64,
    pub nm_tol: f64,
    pub nm_max_iter: usize,
}

impl Default for IStarConfig {
    fn default() -> Self {
        Self {
            i_f: IfConfig::default(),
            grid_step: 0.05,
            nm_tol: 1e-4,
            nm_max_iter: 200,
        }
    }
}

/// Minimum of `I^F(x, q) + x KL(q|p)` over product laws on `p`'s atoms.
#[derive(Debug, Clone, Serialize)]
pub struct IStarResult {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
    pub argmin_weights: Vec<f64>,
    pub i_f: f64,
    pub kl: f64,
    pub lambda_star: f64,
    /// The search covers product laws only, so `value` bounds the true
    /// infimum from above.
    pub restricted_family: bool,
    pub evaluations: usize,
}

fn simplex_grid(dim: usize, step: f64) -> Vec<Vec<f64>> {
    let n = (1.0 / step).round() as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; dim];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>, n: usize) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.iter().map(|&c| c as f64 / n as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[i] = c;
            rec(i + 1, left - c, cur, out, n);
        }
    }
    rec(0, n, &mut cur, &mut out, n);
    out
}

fn istar_objective(x: f64, p: &EnvironmentDistribution, w: &[f64], cfg: &IfConfig) -> Option<(f64, IfEstimate, f64)> {
    let q = ProductMeasure::new(p, w).ok()?;
    let est = i_f(x, &q, cfg).ok()?;
    Some((est.value + x * q.kl_per_site(), est, q.kl_per_site()))
}

/// Restricted `I*(x)`: a coarse simplex grid on `p`'s atom weights (always
/// containing `p`), then Nelder–Mead from the best grid point. All candidates
/// share the uniforms of one sample, so differences are not blurred by noise.
pub fn i_star(x: f64, p: &EnvironmentDistribution, cfg: &IStarConfig) -> Result<IStarResult> {
    ballistic_summary(p)?;
    let dim = p.len();
    let base: Vec<f64> = p.atoms().iter().map(|a| a.weight).collect();
    let mut grid = if dim > 1 { simplex_grid(dim, cfg.grid_step) } else { Vec::new() };
    grid.push(base.clone());
    let scored: Vec<Option<(f64, IfEstimate, f64)>> =
        grid.par_iter().map(|w| istar_objective(x, p, w, &cfg.i_f)).collect();
    let mut evaluations = grid.len();
    let (mut best_w, mut best) = (base.clone(), None::<(f64, IfEstimate, f64)>);
    for (w, s) in grid.iter().zip(scored) {
        if let Some(s) = s {
            if best.as_ref().map_or(true, |b| s.0 < b.0) {
                best = Some(s);
                best_w = w.clone();
            }
        }
    }
    let mut best = best.ok_or_else(|| LabError::Undefined("no feasible product measure".into()))?;
    if dim > 1 {
        let to_weights = |v: &[f64]| -> Option<Vec<f64>> {
            let mut w = v.to_vec();
            let last = 1.0 - v.iter().sum::<f64>();
            w.push(last);
            if w.iter().all(|c| (-1e-12..=1.0 + 1e-12).contains(c)) {
                Some(w.iter().map(|c| c.clamp(0.0, 1.0)).collect())
            } else {
                None
            }
        };
        let mut cache: Vec<(Vec<f64>, (f64, IfEstimate, f64))> = Vec::new();
        let nm = nelder_mead(
            |v| {
                evaluations += 1;
                match to_weights(v).and_then(|w| istar_objective(x, p, &w, &cfg.i_f).map(|s| (w, s))) {
                    Some((w, s)) => {
                        let val = s.0;
                        cache.push((w, s));
                        val
                    }
                    None => f64::INFINITY,
                }
            },
            &best_w[..dim - 1],
            cfg.grid_step,
            cfg.nm_tol,
            cfg.nm_max_iter,
        );
        if nm.value < best.0 {
            if let Some((w, s)) = cache.into_iter().find(|(_, s)| s.0 == nm.value) {
                best = s;
                best_w = w;
            }
        }
    }
    let (value, est, kl) = best;
    Ok(IStarResult {
        x,
        value,
        stderr: est.stderr,
        argmin_weights: best_w,
        i_f: est.value,
        kl,
        lambda_star: est.lambda_star,
        restricted_family: true,
        evaluations,
    })
}

/// Settings for [`x_star`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct XStarConfig {
    pub i_star: IStarConfig,
    pub x_min: f64,
    /// Stand-in for `1⁻`.
    pub x_max: f64,
    pub tol: f64,
    /// Error-bar multiplier on the `I*` standard error.
    pub sigmas: f64,
}

impl Default for XStarConfig {
    fn default() -> Self {
        Self {
            i_star: IStarConfig::default(),
            x_min: 0.02,
            x_max: 1.0 - 1e-3,
            tol: 2e-3,
            sigmas: 2.0,
        }
    }
}

/// `x*(A)` for the restricted curve with a bracketing interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XStar {
    pub a: f64,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    /// `A · I*(1⁻) < 1`, so `x* = 1`.
    pub boundary: bool,
    pub restricted_family: bool,
    /// `(x, I*(x), stderr)` at every evaluated point.
    pub evaluations: Vec<(f64, f64, f64)>,
}

/// Bisection on `x ↦ A I*(x) − 1`. The returned `[lo, hi]` is widened from
/// the bisection bracket to evaluated points where `A(I* ± σ·se)` is still
/// on the correct side of 1.
pub fn x_star(a: f64, p: &EnvironmentDistribution, cfg: &XStarConfig) -> Result<XStar> {
    if !(a > 0.0) {
        return Err(LabError::InvalidArgument(format!("A must be positive, got {a}")));
    }
    let mut evals: Vec<(f64, f64, f64)> = Vec::new();
    let mut eval = |x: f64| -> Result<f64> {
        let r = i_star(x, p, &cfg.i_star)?;
        evals.push((x, r.value, r.stderr));
        Ok(a * r.value - 1.0)
    };
    let top = eval(cfg.x_max)?;
    if top < 0.0 {
        return Ok(XStar {
            a,
            point: 1.0,
            lo: cfg.x_max,
            hi: 1.0,
            boundary: true,
            restricted_family: true,
            evaluations: evals,
        });
    }
    let bottom = eval(cfg.x_min)?;
    let (mut lo, mut hi) = (cfg.x_min, cfg.x_max);
    if bottom > 0.0 {
        return Ok(XStar {
            a,
            point: cfg.x_min,
            lo: 0.0,
            hi: cfg.x_min,
            boundary: false,
            restricted_family: true,
            evaluations: evals,
        });
    }
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let point = 0.5 * (lo + hi);
    let s = cfg.sigmas;
    let below = evals
        .iter()
        .filter(|e| a * (e.1 + s * e.2) < 1.0)
        .map(|e| e.0)
        .fold(0.0f64, f64::max)
        .min(lo);
    let above = evals
        .iter()
        .filter(|e| a * (e.1 - s * e.2) > 1.0)
        .map(|e| e.0)
        .fold(1.0f64, f64::min)
        .max(hi);
    Ok(XStar {
        a,
        point,
        lo: below,
        hi: above,
        boundary: false,
        restricted_family: true,
        evaluations: evals,
    })
}

/// One row of [`if_floor_check`].
#[derive(Debug, Clone, Serialize)]
pub struct FloorRow {
    pub y: f64,
    pub one_block: f64,
    pub two_block: f64,
    /// `(N, N I_m(y/N))`.
    pub split: Vec<(usize, f64)>,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FloorReport {
    pub s: f64,
    pub rows: Vec<FloorRow>,
    pub all_hold: bool,
}

/// Checks `I^F_c(y) ≥ s y` through the one- and two-block reductions of the
/// block variational problem and the equal-split bound `N I_m(y/N) ≥ s y`.
pub fn if_floor_check(p: &EnvironmentDistribution, y_grid: &[f64]) -> Result<FloorReport> {
    let s = match min_ratio_s(p).value {
        Extended::Finite(s) => s,
        Extended::PosInfinity => return Err(LabError::Undefined("s is infinite".into())),
    };
    let law = IncrementLaw::from_log_rho(p);
    let im = |z: f64| legendre(&law, z).value;
    let (zlo, zhi) = (law.min(), law.max());
    let rows: Vec<FloorRow> = y_grid
        .iter()
        .map(|&y| {
            let one = im(y);
            // x₁ + x₂ = y with x₁ ≤ y, or x₁ = y and x₂ ≤ 0 (which costs I_m(y))
            let mut two = one;
            const G: usize = 2000;
            for j in 0..=G {
                let x1 = zlo + (y.min(zhi) - zlo) * j as f64 / G as f64;
                two = two.min(im(x1) + im(y - x1));
            }
            let split: Vec<(usize, f64)> = (1..=8).map(|n| (n, n as f64 * im(y / n as f64))).collect();
            let bound = s * y;
            let holds = one.min(two) >= bound - 1e-6 && split.iter().all(|&(_, v)| v >= bound - 1e-6);
            FloorRow {
                y,
                one_block: one,
                two_block: two,
                split,
                bound,
                holds,
            }
        })
        .collect();
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(FloorReport { s, rows, all_hold })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateKind {
    Cramer,
    Im,
    IF,
    IStar,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RateDiagnostics {
    pub l: Option<usize>,
    pub samples: Option<usize>,
    pub burn_in: Option<usize>,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub x: f64,
    pub value: f64,
    pub lambda_star: f64,
    pub diagnostics: RateDiagnostics,
}

/// A sampled rate function.
#[derive(Debug, Clone, Serialize)]
pub struct RateCurve {
    pub kind: RateKind,
    pub restricted_family: bool,
    pub points: Vec<RatePoint>,
}

impl RateCurve {
    pub fn cramer(law: &IncrementLaw, xs: &[f64]) -> Self {
        Self::exact(RateKind::Cramer, xs, |x| legendre(law, x))
    }

    pub fn im(dist: &EnvironmentDistribution, zs: &[f64]) -> Self {
        let law = IncrementLaw::from_log_rho(dist);
        Self::exact(RateKind::Im, zs, |z| legendre(&law, z))
    }

    fn exact(kind: RateKind, xs: &[f64], f: impl Fn(f64) -> Legendre) -> Self {
        let points = xs
            .iter()
            .map(|&x| {
                let l = f(x);
                RatePoint {
                    x,
                    value: l.value,
                    lambda_star: l.lambda_star,
                    diagnostics: RateDiagnostics::default(),
                }
            })
            .collect();
        Self {
            kind,
            restricted_family: false,
            points,
        }
    }

    pub fn i_f(q: &ProductMeasure, xs: &[f64], cfg: &IfConfig) -> Result<Self> {
        let points = xs
            .par_iter()
            .map(|&x| {
                i_f(x, q, cfg).map(|e| RatePoint {
                    x,
                    value: e.value,
                    lambda_star: e.lambda_star,
                    diagnostics: RateDiagnostics {
                        l: Some(e.l),
                        samples: Some(e.n_sites),
                        burn_in: Some(e.burn_in),
                        stderr: Some(e.stderr),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: RateKind::IF,
            restricted_family: false,
            points,
        })
    }

    pub fn i_star(p: &EnvironmentDistribution, xs: &[f64], cfg: &IStarConfig) -> Result<Self> {
        let points = xs
            .iter()
            .map(|&x| {
                i_star(x, p, cfg).map(|r| RatePoint {
                    x,
                    value: r.value,
                    lambda_star: r.lambda_star,
                    diagnostics: RateDiagnostics {
                        l: Some(cfg.i_f.l),
                        samples: Some(cfg.i_f.n_sites),
                        burn_in: None,
                        stderr: Some(r.stderr),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: RateKind::IStar,
            restricted_family: true,
            points,
        })
    }

    /// Midpoint convexity on consecutive finite triples of an evenly spaced grid.
    pub fn is_convex(&self, tol: f64) -> bool {
        self.points.windows(3).all(|w| {
            let (a, b, c) = (w[0].value, w[1].value, w[2].value);
            !(a.is_finite() && b.is_finite() && c.is_finite()) || b <= 0.5 * (a + c) + tol
        })
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].value >= w[0].value - tol)
    }

    /// Columns `x, value, lambda_star, L, stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value", "lambda_star", "L", "stderr"]).map_err(csv_err)?;
        for p in &self.points {
            w.write_record([
                p.x.to_string(),
                p.value.to_string(),
                p.lambda_star.to_string(),
                p.diagnostics.l.map_or(String::new(), |l| l.to_string()),
                p.diagnostics.stderr.map_or(String::new(), |s| s.to_string()),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{make_two_point, Atom};
    use proptest::prelude::*;

    fn small_if() -> IfConfig {
        IfConfig {
            l: 16,
            n_sites: 4000,
            ..IfConfig::default()
        }
    }

    #[test]
    fn fair_coin_cramer() {
        let law = IncrementLaw::fair_coin();
        assert!(cramer_rate(&law, 0.0).abs() < 1e-15);
        assert!((cramer_rate(&law, 1.0) - 2f64.ln()).abs() < 1e-14);
        assert!((cramer_rate(&law, 0.999_999) - 2f64.ln()).abs() < 1e-4);
        let want = 0.75 * 3f64.ln() - 2f64.ln();
        assert!((cramer_rate(&law, 0.5) - want).abs() < 1e-12);
        assert!((a_alpha(&law, 0.5).unwrap() - 1.0 / want).abs() < 1e-9);
        assert_eq!(cramer_rate(&law, 1.5), f64::INFINITY);
        assert!(a_alpha(&law, 0.0).is_err());
    }

    #[test]
    fn legendre_duality() {
        let law = IncrementLaw::new(vec![-1.0, 0.5, 2.0], vec![0.5, 0.3, 0.2]).unwrap();
        for z in [-0.9, -0.3, 0.0, 0.7, 1.9] {
            let l = legendre(&law, z);
            let h = 1e-5;
            let d = (law.log_mgf(l.lambda_star + h) - law.log_mgf(l.lambda_star - h)) / (2.0 * h);
            assert!((d - z).abs() < 1e-6, "z={z}: {d}");
        }
    }

    #[test]
    fn min_ratio_closed_form() {
        let p = EnvironmentDistribution::standard();
        let r = min_ratio_s(&p);
        assert!((r.value.as_f64() - 2.0).abs() < 1e-6, "{:?}", r.value);
        assert!(i_m(&p, p.mean_log_rho()).value.abs() < 1e-12);
        let point = EnvironmentDistribution::new(vec![Atom { omega: 2.0 / 3.0, weight: 1.0 }], 0.1).unwrap();
        let m = min_ratio_s(&point);
        assert_eq!(m.value, Extended::PosInfinity);
        assert!(m.certificate.iter().all(|&(_, l)| l < 0.0));
        assert_eq!(i_m(&point, 0.1).value, f64::INFINITY);
        assert!(i_m(&point, -(2f64.ln())).value.abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn min_ratio_matches_root(w in 0.55f64..0.95, hi in 0.55f64..0.85, lo in 0.15f64..0.45) {
            let p = make_two_point(hi, lo, w, 0.1).unwrap();
            prop_assume!(p.mean_rho() < 0.98);
            let s = ballistic_summary(&p).unwrap().lambda_root_s.as_f64();
            let m = min_ratio_s(&p).value.as_f64();
            prop_assert!((m - s).abs() < 1e-6, "{} vs {}", m, s);
        }
    }

    #[test]
    fn kl_cases() {
        let p = make_two_point(0.8, 0.3, 0.8, 0.1).unwrap();
        assert_eq!(kl_per_site(&p, &p), 0.0);
        let q = make_two_point(0.8, 0.3, 0.5, 0.1).unwrap();
        let want = 0.5 * (0.5f64 / 0.8).ln() + 0.5 * (0.5f64 / 0.2).ln();
        assert!((kl_per_site(&q, &p) - want).abs() < 1e-15);
        let r = make_two_point(0.8, 0.6, 0.5, 0.1).unwrap();
        assert_eq!(kl_per_site(&r, &p), f64::INFINITY);
    }

    #[test]
    fn i_f_small_x_and_ladder() {
        let q = ProductMeasure::of(&EnvironmentDistribution::standard());
        let tiny = i_f(1e-6, &q, &small_if()).unwrap();
        assert!(tiny.value.abs() < 1e-5);
        let ladder = i_f_ladder(0.6, &q, &[1, 2, 4, 8, 16], &small_if()).unwrap();
        assert!(ladder_is_monotone(&ladder, 1e-12), "{ladder:?}");
        // ω̂¹ ≡ 1, so the L = 1 walk is deterministic and its rate vanishes
        assert_eq!(ladder[0].value, 0.0);
        assert!(ladder[1..].iter().all(|e| e.stderr > 0.0 && e.stderr.is_finite()), "{ladder:?}");
    }

    #[test]
    fn i_star_feasibility_and_floor() {
        let p = EnvironmentDistribution::standard();
        let cfg = IStarConfig {
            i_f: small_if(),
            grid_step: 0.1,
            ..IStarConfig::default()
        };
        let r = i_star(0.6, &p, &cfg).unwrap();
        let at_p = i_f(0.6, &ProductMeasure::of(&p), &cfg.i_f).unwrap();
        assert!(r.value <= at_p.value + 1e-12);
        assert!(r.restricted_family);
        let report = if_floor_check(&p, &[0.0, 0.1, 0.3, 0.5, 0.69]).unwrap();
        assert!(report.all_hold, "{report:?}");
    }

    #[test]
    fn curves_and_export() {
        let xs: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
        let c = RateCurve::cramer(&IncrementLaw::fair_coin(), &xs);
        assert!(c.is_convex(1e-12));
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,value,lambda_star,L,stderr"));
        assert_eq!(text.lines().count(), 22);
    }
}
