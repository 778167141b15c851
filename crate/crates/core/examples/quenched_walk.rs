//! Quenched simulation, ladder times and the windowed increment statistic.
//!
//! cargo run --release --example quenched_walk

use rwre_lab::env_model::{ballistic_summary, sample_environment, EnvironmentDistribution};
use rwre_lab::quenched_walk::{er_statistic, simulate_until, simulate_with, Mode, StopRule, WalkOptions};
use rwre_lab::rng::{stream, stream_rng, TAG_WALK};

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let v = ballistic_summary(&p)?.velocity;
    let n = 1_000_000u64;
    let env = sample_environment(&p, -5000, 200_000, 1);

    let (traj, rec) = simulate_until(&env, 0, StopRule::Steps(n), 1, Mode::Summary { ks: vec![50, 69, 100] })?;
    println!("X_n/n = {:.4} (v_p = {v:.4})", traj.final_position as f64 / n as f64);
    println!("tau_1000 = {:?}, lowest site {}", rec.tau(1000), rec.min_position);
    for k in [50, 69, 100] {
        println!("k={k:>3}  max_t (X_(t+k) - X_t)/k = {:.3}", er_statistic(&traj, k)?);
    }

    // local times from a full run
    let mut rng = stream_rng(2, stream(0, TAG_WALK));
    let opts = WalkOptions { record_local_times: true, ..WalkOptions::default() };
    let (_, rec) = simulate_with(&env, 0, StopRule::HitSite(200), &mut rng, &opts)?;
    let busiest = (0..200).max_by_key(|&i| rec.local_time(i).unwrap_or(0)).unwrap();
    println!("most visited site before tau_200: {busiest} ({} visits)", rec.local_time(busiest).unwrap());
    Ok(())
}
