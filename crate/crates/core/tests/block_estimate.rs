//! Both block inequalities at a size where each side can be simulated:
//! `P[Ẋ(k, τ_m) ≥ x] ≤ n χ(k, x, c)` and
//! `P[Ẋ(k, τ_m) < x] ≤ exp(−(⌊(m − k)/(ck)⌋ − 1) χ(k, x, c))`, with
//! `m = ⌊v_p n⌋`, up to five joint standard errors taken under the bound.
//! The polynomial error terms are dropped.

use rwre_lab::chi_estimator::chi_mc;
use rwre_lab::env_model::{ballistic_summary, sample_environment_with, EnvironmentDistribution, SampleOptions};
use rwre_lab::quenched_walk::{er_statistic, simulate_with, StopRule, WalkOptions};
use rwre_lab::rng::{stream, stream_rng, TAG_WALK};

fn xdot_samples(p: &EnvironmentDistribution, n: usize, k: usize, walks: u64, seed: u64) -> Vec<f64> {
    let m = (ballistic_summary(p).unwrap().velocity * n as f64).floor() as i64;
    let margin = 3000;
    (0..walks)
        .filter_map(|r| {
            let env = sample_environment_with(p, -margin, margin as usize + m as usize + 1, seed, SampleOptions { replica: r, antithetic: false });
            let mut rng = stream_rng(seed, stream(r, TAG_WALK));
            let (traj, _) = simulate_with(&env, 0, StopRule::HitSite(m), &mut rng, &WalkOptions::default()).ok()?;
            er_statistic(&traj, k).ok()
        })
        .collect()
}

#[test]
fn block_inequalities_hold_at_small_n() {
    let p = EnvironmentDistribution::standard();
    let n = 10_000usize;
    let k = (5.0 * (n as f64).ln()).floor() as usize;
    let c = 4.0;
    let walks = 2000;
    let xs = xdot_samples(&p, n, k, walks, 17);
    assert!(xs.len() as u64 >= walks - 5);
    let m = (ballistic_summary(&p).unwrap().velocity * n as f64).floor();
    for x in [0.5, 0.7, 0.9] {
        let chi = chi_mc(&p, k, x, c, 4000, 3).unwrap();
        let hits = xs.iter().filter(|&&v| v >= x).count() as f64 / xs.len() as f64;
        // binomial error evaluated at the bound, as for a one-sided test
        let se_at = |q: f64| (q.clamp(0.0, 1.0) * (1.0 - q.clamp(0.0, 1.0)) / xs.len() as f64).sqrt();

        let upper = n as f64 * chi.mean;
        let slack = 5.0 * se_at(upper).hypot(n as f64 * chi.stderr);
        assert!(hits <= upper + slack, "x={x}: P[Xdot >= x]={hits} vs n chi={upper}");

        let blocks = ((m - k as f64) / (c * k as f64)).floor() - 1.0;
        let lower_bound = (-blocks * chi.mean).exp();
        let slack = 5.0 * se_at(lower_bound).hypot(blocks * lower_bound * chi.stderr);
        assert!(1.0 - hits <= lower_bound + slack, "x={x}: P[Xdot < x]={} vs {lower_bound}", 1.0 - hits);
    }
}
