//! The potential `V`, the Lyapunov function `S` (log domain), `W`, `ξ`, `ξ̄`,
//! exit probabilities, and the ε-block quantity `Δ_ε`.

use std::io::Write;

use serde::Serialize;

use crate::env_model::Environment;
use crate::error::{LabError, Result};
use crate::numerics::StreamingLogSumExp;

/// `C_κ = (1 − κ)/κ`.
pub fn c_kappa(kappa: f64) -> f64 {
    (1.0 - kappa) / kappa
}

/// Prefix arrays of `V` and `log S` for the shifted environment `θ^origin ω`.
///
/// Index `j` refers to site `origin + j` of the underlying environment, so
/// `v[j] = Σ_{i=1}^{j} log ρ_{origin+i}` and
/// `log_s[n] = log Σ_{i=0}^{n-1} e^{v[i]}` with `log_s[0] = -∞`.
#[derive(Debug, Clone)]
pub struct PotentialProfile {
    origin: i64,
    env_id: String,
    kappa: f64,
    omega: Vec<f64>,
    v: Vec<f64>,
    log_s: Vec<f64>,
}

impl PotentialProfile {
    /// Builds the profile of `θ^origin ω` for `n ∈ [0, n_max]`. Needs sites
    /// `[origin + 1, origin + n_max]`; the value `ω_origin` is kept when present.
    pub fn build(env: &Environment, origin: i64, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(LabError::InvalidArgument("n_max must be positive".into()));
        }
        env.require(origin + 1, origin + n_max as i64)?;
        let mut omega = Vec::with_capacity(n_max + 1);
        omega.push(env.try_omega(origin).unwrap_or(f64::NAN));
        let mut v = Vec::with_capacity(n_max + 1);
        let mut log_s = Vec::with_capacity(n_max + 1);
        v.push(0.0);
        log_s.push(f64::NEG_INFINITY);
        let mut acc = StreamingLogSumExp::new();
        let mut vj = 0.0;
        for j in 1..=n_max {
            acc.push(v[j - 1]);
            log_s.push(acc.value());
            let w = env.omega(origin + j as i64);
            omega.push(w);
            vj += ((1.0 - w) / w).ln();
            v.push(vj);
        }
        Ok(Self {
            origin,
            env_id: env.identity(),
            kappa: env.kappa(),
            omega,
            v,
            log_s,
        })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn env_id(&self) -> &str {
        &self.env_id
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Largest `n` with `log S(n)` available.
    pub fn n_max(&self) -> usize {
        self.v.len() - 1
    }

    /// `V(j)` of the shifted environment.
    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v[j]
    }

    /// `log S(n)` of the shifted environment; `-∞` at `n = 0`.
    #[inline]
    pub fn log_s(&self, n: usize) -> f64 {
        self.log_s[n]
    }

    /// `ω_{origin + j}` for `j ≥ 1`.
    #[inline]
    pub fn omega(&self, j: usize) -> f64 {
        self.omega[j]
    }

    pub fn v_slice(&self) -> &[f64] {
        &self.v
    }

    pub fn log_s_slice(&self) -> &[f64] {
        &self.log_s
    }

    /// `log W(n) = V(n) − log S(n)`.
    #[inline]
    pub fn log_w(&self, n: usize) -> f64 {
        self.v[n] - self.log_s[n]
    }

    /// Copy with `log S(n)` shifted by `delta`. Used as a negative control.
    pub fn with_perturbed_log_s(&self, n: usize, delta: f64) -> Self {
        let mut p = self.clone();
        p.log_s[n] += delta;
        p
    }

    /// Copy with every stored value rounded through `f32`. Used as a
    /// negative control for precision-sensitive identities.
    pub fn to_reduced_precision(&self) -> Self {
        let round = |x: &f64| *x as f32 as f64;
        let mut p = self.clone();
        p.v = self.v.iter().map(round).collect();
        p.log_s = self.log_s.iter().map(round).collect();
        p
    }

    /// Writes `site,V,logS` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["site", "V", "logS"]).map_err(csv_err)?;
        for j in 0..=self.n_max() {
            w.serialize((self.origin + j as i64, self.v[j], self.log_s[j]))
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(e.to_string())
}

/// Profile of `ω` from the origin, `n ∈ [0, n_max]`.
pub fn build_profile(env: &Environment, n_max: usize) -> Result<PotentialProfile> {
    PotentialProfile::build(env, 0, n_max)
}

/// `P^ω_x[τ₀ > τ_y] = S(x)/S(y)` for `0 < x < y`.
pub fn hit_prob_ratio(profile: &PotentialProfile, x: usize, y: usize) -> Result<f64> {
    if !(0 < x && x < y) {
        return Err(LabError::Ordering(format!("need 0 < x < y, got x={x}, y={y}")));
    }
    if y > profile.n_max() {
        return Err(LabError::WindowTooShort {
            need_lo: 1,
            need_hi: y as i64,
            have_lo: 1,
            have_hi: profile.n_max() as i64,
        });
    }
    Ok((profile.log_s(x) - profile.log_s(y)).exp())
}

/// `W(n) = e^{V(n)}/S(n)`.
pub fn w_value(profile: &PotentialProfile, n: usize) -> f64 {
    profile.log_w(n).exp()
}

/// Upper bound `((1−2κ)/κ)(1 − (κ/(1−κ))^n)^{-1}` on `W(n)`; `1/n` at `κ = 1/2`.
pub fn w_bound(kappa: f64, n: usize) -> f64 {
    let r = kappa / (1.0 - kappa);
    if (1.0 - r).abs() < 1e-12 {
        return 1.0 / n as f64;
    }
    (1.0 - 2.0 * kappa) / kappa / (1.0 - r.powi(n as i32))
}

/// Truncated evaluation of `log S(−∞, θ^origin ω) = log Σ_{j≥1} e^{V(−j)}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SMinusInf {
    /// Log of the accumulated partial sum.
    pub log_value: f64,
    /// Number of terms summed.
    pub depth: usize,
    /// Whether the tail certificate was met.
    pub converged: bool,
}

impl SMinusInf {
    pub fn require(&self) -> Result<f64> {
        if self.converged {
            Ok(self.log_value)
        } else {
            Err(LabError::TruncationFailure { depth: self.depth })
        }
    }
}

/// Accumulates `e^{V(−j)}` for `j = 1, 2, …` going left from `origin`.
///
/// After each term the remaining tail is majorized by a geometric series
/// with ratio given by the observed per-site drift of `V` over the most
/// recent half of the sum, inflated by `C_κ`. Once the majorant drops below
/// `rel_tol` times the partial sum, a verification stretch of equal length is
/// summed and must itself change the result by less than `rel_tol`.
pub fn s_minus_inf_at(env: &Environment, origin: i64, rel_tol: f64, max_depth: usize) -> SMinusInf {
    let ck = c_kappa(env.kappa()).ln();
    let available = (origin - env.lo() + 1).max(0) as usize;
    let limit = max_depth.min(available);
    let mut acc = StreamingLogSumExp::new();
    let mut v_hist: Vec<f64> = Vec::with_capacity(limit + 1);
    let mut v = 0.0;
    v_hist.push(0.0);
    let mut accepted_at: Option<(usize, f64)> = None;
    for j in 1..=limit {
        v -= env.log_rho(origin - j as i64 + 1);
        v_hist.push(v);
        acc.push(v);
        let total = acc.value();
        if let Some((stop, log_at_accept)) = accepted_at {
            if j >= stop {
                let rel = (total - log_at_accept).exp_m1();
                if rel < rel_tol {
                    return SMinusInf {
                        log_value: total,
                        depth: j,
                        converged: true,
                    };
                }
                accepted_at = None;
            }
            continue;
        }
        if j < 16 {
            continue;
        }
        let half = j / 2;
        let drift = (v - v_hist[half]) / (j - half) as f64;
        if drift >= 0.0 {
            continue;
        }
        let log_tail = v + ck - (-(drift.exp_m1())).ln();
        if log_tail - total < rel_tol.ln() {
            accepted_at = Some((2 * j, total));
        }
    }
    SMinusInf {
        log_value: acc.value(),
        depth: limit,
        converged: false,
    }
}

/// `log S(−∞, ω)` anchored at the origin.
pub fn s_minus_inf(env: &Environment, rel_tol: f64, max_depth: usize) -> SMinusInf {
    s_minus_inf_at(env, 0, rel_tol, max_depth)
}

/// `ξ̄(i, θ^origin ω) = W(i+1)/(1 + S(i)/S(−∞))` given `log S(−∞)` of the
/// same shifted environment.
pub fn xi_bar_with(env: &Environment, origin: i64, i: usize, log_s_minus_inf: f64) -> Result<f64> {
    let p = PotentialProfile::build(env, origin, i + 1)?;
    let w = w_value(&p, i + 1);
    let ratio = if i == 0 {
        0.0
    } else {
        (p.log_s(i) - log_s_minus_inf).exp()
    };
    Ok(w / (1.0 + ratio))
}

/// `ξ̄(i, ω)`, requiring a converged `S(−∞)`.
pub fn xi_bar(env: &Environment, i: usize, rel_tol: f64, max_depth: usize) -> Result<f64> {
    let sm = s_minus_inf(env, rel_tol, max_depth).require()?;
    xi_bar_with(env, 0, i, sm)
}

/// `ξ_n(i, ω) = W(i+1, θ^{n−i}ω)/(1 + S(i, θ^{n−i}ω) W(n−i, ω))`, taken as 0
/// when `n ≤ i`.
pub fn xi_n(env: &Environment, n: i64, i: usize) -> Result<f64> {
    let shift = n - i as i64;
    if shift <= 0 {
        return Ok(0.0);
    }
    let local = PotentialProfile::build(env, shift, i + 1)?;
    let base = PotentialProfile::build(env, 0, shift as usize)?;
    let s_i = if i == 0 { 0.0 } else { local.log_s(i).exp() };
    let w_base = w_value(&base, shift as usize);
    Ok(w_value(&local, i + 1) / (1.0 + s_i * w_base))
}

/// Result of the ε-block decomposition behind the `S(xk)/S(ck)` sandwich.
#[derive(Debug, Clone, Serialize)]
pub struct EpsPartition {
    pub eps: f64,
    pub x: f64,
    pub c: f64,
    pub k: usize,
    /// Mean `log ρ` over each block of `[0, ⌊xk⌋ − 1]`.
    pub block_means: Vec<f64>,
    /// Mean `log ρ` over each block of `[⌊xk⌋, ⌊ck⌋ − 1]`.
    pub bar_block_means: Vec<f64>,
    pub block_lengths: Vec<usize>,
    pub bar_block_lengths: Vec<usize>,
}

/// `δ_ε`, `Δ_ε` and the two sides of the block sandwich.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaEps {
    pub delta: f64,
    pub big_delta: f64,
    /// `−(1/k) log(S(⌊xk⌋)/S(⌊ck⌋))`.
    pub target: f64,
    pub lower: f64,
    pub upper: f64,
    pub partition: EpsPartition,
}

impl DeltaEps {
    pub fn sandwich_holds(&self, slack: f64) -> bool {
        self.lower <= self.target + slack && self.target <= self.upper + slack
    }
}

fn even_blocks(start: usize, len: usize, count: usize) -> Vec<(usize, usize)> {
    let base = len / count;
    let extra = len % count;
    let mut out = Vec::with_capacity(count);
    let mut s = start;
    for b in 0..count {
        let l = base + usize::from(b < extra);
        out.push((s, l));
        s += l;
    }
    out
}

fn integral_ratio(r: f64) -> Option<usize> {
    let n = r.round();
    ((r - n).abs() < 1e-9 && n >= 1.0).then_some(n as usize)
}

/// Computes `Δ_ε = ε δ_ε + ε Σ_i b_i`, where `b_i` are the block means of
/// `log ρ` over the partition of `[0, ⌊xk⌋−1]`, and `δ_ε` is the difference
/// of the maximal block partial sums over `[⌊xk⌋, ⌊ck⌋−1]` and over
/// `[0, ⌊xk⌋−1]`. Position `j` contributes `log ρ_{j+1}` so that block sums
/// match increments of `V`.
pub fn delta_eps(env: &Environment, k: usize, x: f64, c: f64, eps: f64) -> Result<DeltaEps> {
    if !(c > x && x > 0.0 && eps > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "need c > x > 0 and eps > 0 (x={x}, c={c}, eps={eps})"
        )));
    }
    let nb = integral_ratio(x / eps).ok_or(LabError::Divisibility { ratio: x / eps })?;
    let nbar = ((c - x) / eps + 1e-9).floor() as usize;
    let xk = (x * k as f64).floor() as usize;
    let ck = (c * k as f64).floor() as usize;
    if nb > xk || nbar == 0 || nbar > ck - xk {
        return Err(LabError::InvalidArgument(format!(
            "k={k} too small for {nb}+{nbar} blocks"
        )));
    }
    let profile = PotentialProfile::build(env, 0, ck)?;
    let block_mean = |(s, l): (usize, usize)| (profile.v(s + l) - profile.v(s)) / l as f64;
    let blocks = even_blocks(0, xk, nb);
    let bar_blocks = even_blocks(xk, ck - xk, nbar);
    let block_means: Vec<f64> = blocks.iter().copied().map(block_mean).collect();
    let bar_block_means: Vec<f64> = bar_blocks.iter().copied().map(block_mean).collect();

    let max_partial = |m: &[f64]| {
        let mut run = 0.0;
        let mut best = f64::NEG_INFINITY;
        for &b in m {
            run += b;
            best = best.max(run);
        }
        best
    };
    let delta = max_partial(&bar_block_means) - max_partial(&block_means);
    let big_delta = eps * delta + eps * block_means.iter().sum::<f64>();

    let kf = k as f64;
    let lc = c_kappa(env.kappa()).ln();
    let target = -(profile.log_s(xk) - profile.log_s(ck)) / kf;
    let upper = (big_delta + eps * lc).max(0.0) + (c + x) * lc / (eps * kf) + (xk as f64).ln() / kf;
    let lower = (big_delta - eps * lc).max(0.0) - (c + x) * lc / (eps * kf) - (ck as f64).ln() / kf;
    Ok(DeltaEps {
        delta,
        big_delta,
        target,
        lower,
        upper,
        partition: EpsPartition {
            eps,
            x,
            c,
            k,
            block_means,
            bar_block_means,
            block_lengths: blocks.iter().map(|b| b.1).collect(),
            bar_block_lengths: bar_blocks.iter().map(|b| b.1).collect(),
        },
    })
}
