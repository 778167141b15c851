//! Classical and RWRE Erdős–Rényi statistics through the harness drivers.
//!
//! cargo run --release --example erdos_renyi

use rwre_lab::env_model::EnvironmentDistribution;
use rwre_lab::harness::experiments::{classical_er_statistic, er_rwre_replica};
use rwre_lab::rate_functions::{a_alpha, IncrementLaw};

fn main() -> rwre_lab::Result<()> {
    let coin = IncrementLaw::fair_coin();
    let a = a_alpha(&coin, 0.5)?;
    for n in [10_000u64, 100_000, 1_000_000] {
        let k = (a * (n as f64).ln()) as usize;
        println!("fair coin n={n:>8} k={k:>3}: {:.3}", classical_er_statistic(&coin, n, k, 1, 0)?);
    }

    let p = EnvironmentDistribution::standard();
    for n in [100_000u64, 1_000_000] {
        let k = (5.0 * (n as f64).ln()) as usize;
        let row = er_rwre_replica(&p, n, k, 10_000, 1, 0)?;
        println!("RWRE A=5 n={n:>8} k={k:>3}: {:.3} (X_n = {})", row.statistic, row.final_position);
    }
    Ok(())
}
