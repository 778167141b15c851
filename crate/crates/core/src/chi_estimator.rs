//! Monte Carlo over environments of the block functional
//! `χ(k, x, c) = E[(1 − f)/(1 − f(1 − g))]`, where
//! `f = P^{ω̂}_1[τ_{⌊xk⌋} > k]` is computed exactly by the hitting DP and
//! `g = S(⌊xk⌋)/S(⌊ck⌋)` exactly from the potential profile.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioned_env::hat_transform;
use crate::env_model::{ballistic_summary, sample_environment_with, EnvironmentDistribution, SampleOptions};
use crate::error::{LabError, Result};
use crate::hitting_kernels::hit_prob_dp;
use crate::numerics::{linear_fit, mean_stderr};
use crate::potential::{build_profile, csv_err};

/// Options for [`chi_mc_multi`].
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ChiOptions {
    /// Pair replica `j` with its antithetic copy (`u ↦ 1 − u` at every site).
    pub antithetic: bool,
    /// Keep the per-sample `(f, g)` pairs.
    pub keep_components: bool,
}

/// Estimate of `χ(k, x, c)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub k: usize,
    pub x: f64,
    pub c: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    /// Replicas that failed and were excluded.
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<(f64, f64)>>,
}

impl ChiEstimate {
    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.mean
    }

    /// `−(1/k) log χ`.
    pub fn minus_log_over_k(&self) -> f64 {
        -self.mean.ln() / self.k as f64
    }
}

/// `(1 − f)/(1 − f(1 − g))` written in terms of `p = 1 − f`.
#[inline]
pub fn integrand(p_hit: f64, g: f64) -> f64 {
    if p_hit == 0.0 {
        return 0.0;
    }
    (p_hit / (p_hit + g * (1.0 - p_hit))).clamp(0.0, 1.0)
}

struct Sample {
    p_hit: f64,
    g: Vec<f64>,
}

fn one_sample(
    p: &EnvironmentDistribution,
    k: usize,
    xk: usize,
    cks: &[usize],
    seed: u64,
    opts: SampleOptions,
) -> Result<Sample> {
    let top = *cks.iter().max().unwrap();
    let env = sample_environment_with(p, 1, top + 1, seed, opts);
    let profile = build_profile(&env, top.max(xk + 1))?;
    let hat = hat_transform(&profile, xk as i64)?;
    let p_hit = hit_prob_dp(&hat, 1, xk as i64, k)?.p_hit;
    let g = cks
        .iter()
        .map(|&ck| (profile.log_s(xk) - profile.log_s(ck)).exp().min(1.0))
        .collect();
    Ok(Sample { p_hit, g })
}

/// `χ(k, x, c)` for several `c` on shared environments (only `g` depends on
/// `c`). Replicas run in parallel and are reduced in replica order, so the
/// result does not depend on the thread count.
pub fn chi_mc_multi(
    p: &EnvironmentDistribution,
    k: usize,
    x: f64,
    cs: &[f64],
    n_samples: usize,
    seed: u64,
    opts: ChiOptions,
) -> Result<Vec<ChiEstimate>> {
    ballistic_summary(p)?;
    if !(x > 0.0) || cs.iter().any(|&c| !(c > x)) || cs.is_empty() {
        return Err(LabError::Ordering(format!("need c > x > 0 (x={x}, c={cs:?})")));
    }
    if n_samples == 0 || k == 0 {
        return Err(LabError::InvalidArgument("need k ≥ 1 and n_samples ≥ 1".into()));
    }
    let xk = (x * k as f64).floor() as usize;
    let cks: Vec<usize> = cs.iter().map(|&c| (c * k as f64).floor() as usize).collect();
    let estimate = |c: f64, mean: f64, stderr: f64, failures: usize, comps: Option<Vec<(f64, f64)>>| ChiEstimate {
        k,
        x,
        c,
        mean,
        stderr,
        n_samples,
        failures,
        components: comps,
    };
    // the walk needs ⌊xk⌋ − 1 steps at least
    if xk < 2 || xk - 1 > k {
        let value = if xk < 2 { 1.0 } else { 0.0 };
        return Ok(cs.iter().map(|&c| estimate(c, value, 0.0, 0, None)).collect());
    }
    let samples: Vec<Result<Sample>> = (0..n_samples)
        .into_par_iter()
        .map(|r| {
            let so = if opts.antithetic {
                SampleOptions {
                    replica: (r / 2) as u64,
                    antithetic: r % 2 == 1,
                }
            } else {
                SampleOptions {
                    replica: r as u64,
                    antithetic: false,
                }
            };
            one_sample(p, k, xk, &cks, seed, so)
        })
        .collect();
    let failures = samples.iter().filter(|s| s.is_err()).count();
    if failures == n_samples {
        return Err(samples.into_iter().find_map(|s| s.err()).unwrap());
    }
    let mut out = Vec::with_capacity(cs.len());
    for (ci, &c) in cs.iter().enumerate() {
        let vals: Vec<Option<f64>> = samples
            .iter()
            .map(|s| s.as_ref().ok().map(|s| integrand(s.p_hit, s.g[ci])))
            .collect();
        let (mean, stderr) = if opts.antithetic {
            let pairs: Vec<f64> = vals
                .chunks(2)
                .filter_map(|ch| {
                    let ok: Vec<f64> = ch.iter().flatten().copied().collect();
                    (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
                })
                .collect();
            mean_stderr(&pairs)
        } else {
            let ok: Vec<f64> = vals.iter().flatten().copied().collect();
            mean_stderr(&ok)
        };
        let comps = opts.keep_components.then(|| {
            samples
                .iter()
                .flatten()
                .map(|s| (1.0 - s.p_hit, s.g[ci]))
                .collect()
        });
        out.push(estimate(c, mean, stderr, failures, comps));
    }
    Ok(out)
}

/// `χ(k, x, c)` by Monte Carlo over `n_samples` environments.
pub fn chi_mc(p: &EnvironmentDistribution, k: usize, x: f64, c: f64, n_samples: usize, seed: u64) -> Result<ChiEstimate> {
    Ok(chi_mc_multi(p, k, x, &[c], n_samples, seed, ChiOptions::default())?.remove(0))
}

/// Least-squares fit of `−log χ(k)` against `k`.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSlope {
    pub x: f64,
    pub c: f64,
    pub slope: f64,
    /// Standard error of the slope propagated from the per-point standard errors.
    pub slope_stderr: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub points: Vec<ChiEstimate>,
}

/// Fits the slope from estimates at increasing `k`. Every estimate must be
/// positive with relative standard error below 25%.
pub fn fit_slope(points: Vec<ChiEstimate>) -> Result<ChiSlope> {
    if points.len() < 3 || points.windows(2).any(|w| w[1].k <= w[0].k) {
        return Err(LabError::InvalidArgument("k grid must be increasing with at least 3 points".into()));
    }
    for pt in &points {
        if !(pt.mean > 0.0) || pt.relative_stderr() >= 0.25 {
            return Err(LabError::Undefined(format!(
                "chi at k={} is {:e} ± {:e}; slope undefined (reduce x or raise n_samples)",
                pt.k, pt.mean, pt.stderr
            )));
        }
    }
    let ks: Vec<f64> = points.iter().map(|p| p.k as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.mean.ln()).collect();
    let (intercept, slope) = linear_fit(&ks, &ys);
    let km = ks.iter().sum::<f64>() / ks.len() as f64;
    let sxx: f64 = ks.iter().map(|k| (k - km) * (k - km)).sum();
    let var: f64 = ks
        .iter()
        .zip(&points)
        .map(|(k, p)| ((k - km) / sxx).powi(2) * p.relative_stderr().powi(2))
        .sum();
    let residuals = ks.iter().zip(&ys).map(|(k, y)| y - intercept - slope * k).collect();
    Ok(ChiSlope {
        x: points[0].x,
        c: points[0].c,
        slope,
        slope_stderr: var.sqrt(),
        intercept,
        residuals,
        points,
    })
}

/// Slopes for several `c` sharing environments at every `k`.
pub fn chi_slope_multi(
    p: &EnvironmentDistribution,
    x: f64,
    cs: &[f64],
    k_grid: &[usize],
    n_samples: usize,
    seed: u64,
    opts: ChiOptions,
) -> Result<Vec<ChiSlope>> {
    let mut per_c: Vec<Vec<ChiEstimate>> = vec![Vec::new(); cs.len()];
    for &k in k_grid {
        for (slot, est) in per_c.iter_mut().zip(chi_mc_multi(p, k, x, cs, n_samples, seed, opts)?) {
            slot.push(est);
        }
    }
    per_c.into_iter().map(fit_slope).collect()
}

/// Slope of `−log χ(k, x, c)` in `k`, the finite-`k` proxy for `I*(x)`.
pub fn chi_slope(
    p: &EnvironmentDistribution,
    x: f64,
    c: f64,
    k_grid: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<ChiSlope> {
    Ok(chi_slope_multi(p, x, &[c], k_grid, n_samples, seed, ChiOptions::default())?.remove(0))
}

/// Columns `k, x, c, n_samples, chi_mean, chi_stderr, minus_log_chi_over_k`.
pub fn write_chi_csv<W: Write>(out: W, rows: &[ChiEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "x", "c", "n_samples", "chi_mean", "chi_stderr", "minus_log_chi_over_k"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.x.to_string(),
            r.c.to_string(),
            r.n_samples.to_string(),
            r.mean.to_string(),
            r.stderr.to_string(),
            r.minus_log_over_k().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
