//! Exact simulation of the quenched nearest-neighbour walk, hitting records,
//! the windowed increment statistic `Ẋ(k, n)`, and backtracking events.

use std::io::Write;

use rand::RngCore;
use serde::Serialize;

use crate::conditioned_env::ConditionedEnvironment;
use crate::env_model::Environment;
use crate::error::{LabError, Result};
use crate::rng::{self, TAG_WALK};

/// Anything that assigns a right-jump probability to a site.
pub trait JumpLaw {
    /// `None` outside the window.
    fn right_prob(&self, site: i64) -> Option<f64>;
}

impl JumpLaw for Environment {
    #[inline]
    fn right_prob(&self, site: i64) -> Option<f64> {
        self.try_omega(site)
    }
}

impl JumpLaw for ConditionedEnvironment {
    #[inline]
    fn right_prob(&self, site: i64) -> Option<f64> {
        self.covers(site, site).then(|| self.right(site))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Stop at the first visit to the site.
    HitSite(i64),
    /// Stop after exactly this many steps.
    Steps(u64),
    /// Stop at the first visit to either end of `[lo, hi]`.
    ExitInterval { lo: i64, hi: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// Keep every step.
    Full,
    /// Keep only the running maxima of `X_{t+k} − X_t` for the listed `k`.
    Summary { ks: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Target,
    StepLimit,
    StepCap,
}

/// Extra knobs for [`simulate_with`].
#[derive(Debug, Clone)]
pub struct WalkOptions {
    pub mode: Mode,
    pub record_local_times: bool,
    /// Hard cap on the number of steps for site-based stop rules.
    pub max_steps: u64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            record_local_times: false,
            max_steps: u64::MAX,
        }
    }
}

/// A finished path. In summary mode `steps` is empty and only the
/// windowed maxima are available.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: i64,
    pub length: u64,
    pub seed: u64,
    pub final_position: i64,
    steps: Option<Vec<u64>>,
    summary: Vec<(usize, Option<i64>)>,
}

impl Trajectory {
    /// Builds a full trajectory from explicit ±1 steps.
    pub fn from_steps(start: i64, steps: &[i8]) -> Self {
        let mut packed = vec![0u64; steps.len().div_ceil(64)];
        let mut x = start;
        for (t, &s) in steps.iter().enumerate() {
            assert!(s == 1 || s == -1, "steps must be ±1");
            if s == 1 {
                packed[t / 64] |= 1 << (t % 64);
            }
            x += s as i64;
        }
        Self {
            start,
            length: steps.len() as u64,
            seed: 0,
            final_position: x,
            steps: Some(packed),
            summary: Vec::new(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.steps.is_some()
    }

    /// Step `t` (0-based) as `+1` or `-1`.
    #[inline]
    pub fn step(&self, t: u64) -> i64 {
        let s = self.steps.as_ref().expect("full trajectory");
        if s[(t / 64) as usize] >> (t % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// `X_0, …, X_n` of a full trajectory.
    pub fn positions(&self) -> Result<Vec<i64>> {
        if self.steps.is_none() {
            return Err(LabError::InvalidArgument("summary trajectory has no positions".into()));
        }
        let mut out = Vec::with_capacity(self.length as usize + 1);
        let mut x = self.start;
        out.push(x);
        for t in 0..self.length {
            x += self.step(t);
            out.push(x);
        }
        Ok(out)
    }

    /// `ℓ(i, t) = #{0 ≤ j ≤ t : X_j = i}` recounted from the stored steps.
    pub fn local_time(&self, site: i64, t: u64) -> Result<u64> {
        let pos = self.positions()?;
        let end = (t.min(self.length)) as usize;
        Ok(pos[..=end].iter().filter(|&&x| x == site).count() as u64)
    }
}

/// First-passage data collected during a run.
///
/// Ladder level `j` is the site `start + j`; its first-passage time is
/// `ladder_times[j]` and `backtrack_depth[j]` is the largest `y − X_t` over
/// `t ∈ [τ_y, τ_{y+1})` (or up to the end of the run for the top level).
#[derive(Debug, Clone, Serialize)]
pub struct HittingRecord {
    pub start: i64,
    pub ladder_times: Vec<u64>,
    pub backtrack_depth: Vec<u32>,
    /// Lowest site visited.
    pub min_position: i64,
    pub reason: StopReason,
    /// `(first site, counts)` when local times were requested.
    pub local_times: Option<(i64, Vec<u64>)>,
}

impl HittingRecord {
    /// `τ_y` for `y ≥ start`, if the walk reached `y`.
    pub fn tau(&self, y: i64) -> Option<u64> {
        if y < self.start {
            return None;
        }
        self.ladder_times.get((y - self.start) as usize).copied()
    }

    /// Highest site reached.
    pub fn max_position(&self) -> i64 {
        self.start + self.ladder_times.len() as i64 - 1
    }

    /// `ℓ(i, n)` at the end of the run.
    pub fn local_time(&self, site: i64) -> Option<u64> {
        let (lo, counts) = self.local_times.as_ref()?;
        if site < *lo {
            return Some(0);
        }
        Some(counts.get((site - lo) as usize).copied().unwrap_or(0))
    }
}

/// Simulates with replica 0 of `seed`.
pub fn simulate_until<E: JumpLaw>(
    env: &E,
    start: i64,
    stop: StopRule,
    seed: u64,
    mode: Mode,
) -> Result<(Trajectory, HittingRecord)> {
    let mut g = rng::stream_rng(seed, rng::stream(0, TAG_WALK));
    let opts = WalkOptions {
        mode,
        ..WalkOptions::default()
    };
    let (mut traj, rec) = simulate_with(env, start, stop, &mut g, &opts)?;
    traj.seed = seed;
    Ok((traj, rec))
}

/// Simulates the walk driven by `rng` until `stop` fires.
pub fn simulate_with<E: JumpLaw, R: RngCore>(
    env: &E,
    start: i64,
    stop: StopRule,
    rng: &mut R,
    opts: &WalkOptions,
) -> Result<(Trajectory, HittingRecord)> {
    let step_limit = match stop {
        StopRule::Steps(n) => n,
        _ => opts.max_steps,
    };
    let hits_target = |x: i64| match stop {
        StopRule::HitSite(y) => x == y,
        StopRule::Steps(_) => false,
        StopRule::ExitInterval { lo, hi } => x <= lo || x >= hi,
    };

    let full = matches!(opts.mode, Mode::Full);
    let ks: Vec<usize> = match &opts.mode {
        Mode::Summary { ks } => ks.clone(),
        Mode::Full => Vec::new(),
    };
    let ring_len = ks.iter().copied().max().unwrap_or(0) + 1;
    let mut ring = vec![0i64; ring_len];
    let mut best: Vec<Option<i64>> = vec![None; ks.len()];

    let mut steps: Vec<u64> = Vec::new();
    let mut ladder_times = vec![0u64];
    let mut depth = vec![0u32];
    let mut top = start;
    let mut min_pos = start;
    let mut local: Option<(i64, Vec<u64>)> = opts.record_local_times.then(|| (start, vec![1u64]));

    let mut x = start;
    let mut t: u64 = 0;
    ring[0] = x;
    let mut reason = StopReason::StepLimit;
    while t < step_limit {
        let p = env.right_prob(x).ok_or(LabError::WindowExit { site: x })?;
        let u = rng::uniform(rng);
        let right = u < p;
        if full {
            if t % 64 == 0 {
                steps.push(0);
            }
            if right {
                *steps.last_mut().unwrap() |= 1 << (t % 64);
            }
        }
        x += if right { 1 } else { -1 };
        t += 1;

        if x > top {
            top = x;
            ladder_times.push(t);
            depth.push(0);
        } else {
            let d = (top - x) as u32;
            let slot = depth.last_mut().unwrap();
            if d > *slot {
                *slot = d;
            }
            if x < min_pos {
                min_pos = x;
            }
        }
        if let Some((lo, counts)) = local.as_mut() {
            if x < *lo {
                let shift = (*lo - x) as usize;
                let mut grown = vec![0u64; shift];
                grown.extend_from_slice(counts);
                *counts = grown;
                *lo = x;
            }
            let idx = (x - *lo) as usize;
            if idx >= counts.len() {
                counts.resize(idx + 1, 0);
            }
            counts[idx] += 1;
        }
        if !ks.is_empty() {
            ring[(t as usize) % ring_len] = x;
            for (slot, &k) in best.iter_mut().zip(&ks) {
                // windows start at t₀ ≥ 1
                if k >= 1 && t >= k as u64 + 1 {
                    let inc = x - ring[((t - k as u64) as usize) % ring_len];
                    if slot.is_none_or(|b| inc > b) {
                        *slot = Some(inc);
                    }
                }
            }
        }
        if hits_target(x) {
            reason = StopReason::Target;
            break;
        }
    }
    if reason != StopReason::Target && !matches!(stop, StopRule::Steps(_)) {
        reason = StopReason::StepCap;
    }
    let traj = Trajectory {
        start,
        length: t,
        seed: 0,
        final_position: x,
        steps: full.then_some(steps),
        summary: ks.into_iter().zip(best).collect(),
    };
    let rec = HittingRecord {
        start,
        ladder_times,
        backtrack_depth: depth,
        min_position: min_pos,
        reason,
        local_times: local,
    };
    Ok((traj, rec))
}

/// Maximum of `X_{t+k} − X_t` over `t_from ≤ t ≤ n − k`, for any position
/// sequence. `None` when no window fits.
pub fn max_window_increment<T>(positions: &[T], k: usize, t_from: usize) -> Option<T>
where
    T: Copy + PartialOrd + std::ops::Sub<Output = T>,
{
    if k == 0 || positions.len() < t_from + k + 1 {
        return None;
    }
    let mut best = positions[t_from + k] - positions[t_from];
    for t in t_from + 1..positions.len() - k {
        let inc = positions[t + k] - positions[t];
        if inc > best {
            best = inc;
        }
    }
    Some(best)
}

/// `Ẋ(k, n) = max_{1 ≤ t ≤ n−k} (X_{t+k} − X_t)/k`.
pub fn er_statistic(traj: &Trajectory, k: usize) -> Result<f64> {
    let n = traj.length as usize;
    if k == 0 || n < k + 1 {
        return Err(LabError::KTooLarge { k, len: n });
    }
    if traj.is_full() {
        let pos = traj.positions()?;
        let best = max_window_increment(&pos, k, 1).expect("window fits");
        return Ok(best as f64 / k as f64);
    }
    match traj.summary.iter().find(|(kk, _)| *kk == k) {
        Some((_, Some(best))) => Ok(*best as f64 / k as f64),
        Some((_, None)) => Err(LabError::KTooLarge { k, len: n }),
        None => Err(LabError::InvalidArgument(format!("k={k} was not tracked in summary mode"))),
    }
}

/// `B(n, a)`: some ladder level `y ∈ [1, n]` is followed by a return to
/// `y − a` before `τ_{y+1}`. Levels the walk never reached do not count.
pub fn backtrack_event(hits: &HittingRecord, n: i64, a: u32) -> bool {
    let first = 1.max(hits.start);
    (first..=n.min(hits.max_position())).any(|y| hits.backtrack_depth[(y - hits.start) as usize] >= a)
}

/// One CSV row of a replica summary.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub replica: u64,
    pub n: u64,
    pub k: usize,
    pub er_statistic: f64,
    pub tau_n: Option<u64>,
    pub backtrack_flag: bool,
}

/// Writes rows with the header `replica,n,k,er_statistic,tau_n,backtrack_flag`.
pub fn write_rows<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(crate::potential::csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::{sample_environment, EnvironmentDistribution};
    use proptest::prelude::*;

    #[test]
    fn fixed_seed_reproducible() {
        let env = sample_environment(&EnvironmentDistribution::standard(), -2000, 6000, 1);
        let a = simulate_until(&env, 0, StopRule::Steps(3000), 7, Mode::Full).unwrap();
        let b = simulate_until(&env, 0, StopRule::Steps(3000), 7, Mode::Full).unwrap();
        assert_eq!(a.0.positions().unwrap(), b.0.positions().unwrap());
        let (t, h) = simulate_until(&env, 0, StopRule::Steps(0), 7, Mode::Full).unwrap();
        assert_eq!(t.length, 0);
        assert_eq!(h.max_position(), 0);
    }

    #[test]
    fn near_deterministic_hitting_time() {
        let kappa = 0.05;
        let env = Environment::constant(-200, 400, 1.0 - kappa, kappa).unwrap();
        let v = 1.0 - 2.0 * kappa;
        let mut total = 0.0;
        for seed in 0..1000 {
            let (_, h) = simulate_until(&env, 0, StopRule::HitSite(100), seed, Mode::Full).unwrap();
            total += h.tau(100).unwrap() as f64;
        }
        let mean = total / 1000.0;
        assert!((mean - 100.0 / v).abs() < 0.1 * 100.0 / v);
    }

    #[test]
    fn window_exit_is_an_error() {
        let env = Environment::constant(-5, 10, 0.5, 0.1).unwrap();
        let r = simulate_until(&env, 0, StopRule::Steps(10_000), 3, Mode::Full);
        assert!(matches!(r, Err(LabError::WindowExit { .. })));
    }

    #[test]
    fn er_statistic_examples() {
        let right = Trajectory::from_steps(0, &[1; 30]);
        assert_eq!(er_statistic(&right, 5).unwrap(), 1.0);
        let alt: Vec<i8> = (0..40).map(|t| if t % 2 == 0 { 1 } else { -1 }).collect();
        assert_eq!(er_statistic(&Trajectory::from_steps(0, &alt), 6).unwrap(), 0.0);
        assert!(er_statistic(&right, 30).is_err());
    }

    #[test]
    fn er_statistic_brute_force_and_summary() {
        let env = sample_environment(&EnvironmentDistribution::standard(), -20_000, 40_000, 2);
        let ks = vec![3, 20, 57];
        let (full, _) = simulate_until(&env, 0, StopRule::Steps(10_000), 11, Mode::Full).unwrap();
        let (summ, _) =
            simulate_until(&env, 0, StopRule::Steps(10_000), 11, Mode::Summary { ks: ks.clone() }).unwrap();
        let pos = full.positions().unwrap();
        for &k in &ks {
            let mut brute = i64::MIN;
            for t in 1..=(10_000 - k) {
                let mut s = 0;
                for j in 0..k {
                    s += pos[t + j + 1] - pos[t + j];
                }
                brute = brute.max(s);
            }
            assert_eq!(er_statistic(&full, k).unwrap(), brute as f64 / k as f64);
            assert_eq!(er_statistic(&summ, k).unwrap(), brute as f64 / k as f64);
        }
    }

    #[test]
    fn backtrack_examples() {
        let env = Environment::constant(-10, 40, 0.9, 0.1).unwrap();
        let rec = record_from_steps(0, &[1; 20]);
        assert!(!backtrack_event(&rec, 10, 1));
        let rec = record_from_steps(0, &[1, 1, 1, -1, -1, 1, 1, 1]);
        assert!(backtrack_event(&rec, 5, 2));
        assert!(!backtrack_event(&rec, 5, 3));
        assert!(!backtrack_event(&rec, 2, 2));
        let (_, h) = simulate_until(&env, 0, StopRule::HitSite(20), 1, Mode::Full).unwrap();
        assert_eq!(h.max_position(), 20);
    }

    fn record_from_steps(start: i64, steps: &[i8]) -> HittingRecord {
        struct Scripted<'a>(&'a [i8], usize);
        impl rand::RngCore for Scripted<'_> {
            fn next_u32(&mut self) -> u32 {
                self.next_u64() as u32
            }
            fn next_u64(&mut self) -> u64 {
                let s = self.0[self.1];
                self.1 += 1;
                if s == 1 {
                    0
                } else {
                    u64::MAX
                }
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {
                unimplemented!()
            }
            fn try_fill_bytes(&mut self, _: &mut [u8]) -> std::result::Result<(), rand::Error> {
                unimplemented!()
            }
        }
        let env = Environment::constant(start - 100, 200 + steps.len(), 0.5, 0.1).unwrap();
        let mut g = Scripted(steps, 0);
        let (_, h) = simulate_with(
            &env,
            start,
            StopRule::Steps(steps.len() as u64),
            &mut g,
            &WalkOptions {
                record_local_times: true,
                ..WalkOptions::default()
            },
        )
        .unwrap();
        h
    }

    #[test]
    fn local_times_match_replay() {
        let env = sample_environment(&EnvironmentDistribution::standard(), -3000, 6000, 5);
        let mut g = rng::stream_rng(3, 0);
        let opts = WalkOptions {
            record_local_times: true,
            ..WalkOptions::default()
        };
        let (traj, rec) = simulate_with(&env, 0, StopRule::Steps(2000), &mut g, &opts).unwrap();
        for site in rec.min_position..=traj.final_position + 1 {
            assert_eq!(rec.local_time(site).unwrap(), traj.local_time(site, 2000).unwrap());
        }
    }

    proptest! {
        #[test]
        fn ladder_times_increase(seed in 0u64..500) {
            let env = sample_environment(&EnvironmentDistribution::standard(), -5000, 10_000, seed);
            let (traj, rec) = simulate_until(&env, 0, StopRule::Steps(3000), seed, Mode::Full).unwrap();
            prop_assert!(rec.ladder_times.windows(2).all(|w| w[0] < w[1]));
            let pos = traj.positions().unwrap();
            for (j, &t) in rec.ladder_times.iter().enumerate() {
                prop_assert_eq!(pos[t as usize], j as i64);
            }
        }
    }
}
