//! The walk conditioned to escape to the right, and its L-window
//! approximation.
//!
//! cargo run --example conditioned

use rwre_lab::conditioned_env::{hat_l_transform, hat_transform};
use rwre_lab::env_model::{sample_environment, EnvironmentDistribution};
use rwre_lab::potential::build_profile;
use rwre_lab::quenched_walk::{simulate_until, Mode, StopRule};

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let env = sample_environment(&p, -100, 400, 3);
    let prof = build_profile(&env, 200)?;
    let hat = hat_transform(&prof, 150)?;

    println!(" i   omega   hat    hat^2   hat^8   hat^32");
    let ls = [2usize, 8, 32];
    let windows: Vec<_> = ls.iter().map(|&l| hat_l_transform(&env, l, 1, 12)).collect::<Result<_, _>>()?;
    for i in 1..=12 {
        print!("{i:>2}  {:.4}  {:.4}", env.omega(i), hat.right(i));
        for w in &windows {
            print!("  {:.4}", w.right(i));
        }
        println!();
    }

    // the conditioned walk never returns to 0
    let (traj, rec) = simulate_until(&hat, 1, StopRule::HitSite(100), 11, Mode::Full)?;
    println!("hat walk reached 100 in {} steps, lowest site {}", traj.length, rec.min_position);
    let (traj, _) = simulate_until(&env, 1, StopRule::ExitInterval { lo: 0, hi: 100 }, 11, Mode::Full)?;
    println!("plain walk from 1 exited (0, 100) at {}", traj.final_position);
    Ok(())
}
