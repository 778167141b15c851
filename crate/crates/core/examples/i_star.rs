//! I*(x) over product laws on the base atoms, and x*(A).
//!
//! cargo run --release --example i_star

use rwre_lab::env_model::EnvironmentDistribution;
use rwre_lab::rate_functions::{i_star, x_star, IStarConfig, IfConfig, XStarConfig};

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let cfg = IStarConfig {
        i_f: IfConfig { n_sites: 5000, ..IfConfig::default() },
        ..IStarConfig::default()
    };
    for x in [0.5, 0.7, 0.9] {
        let r = i_star(x, &p, &cfg)?;
        println!(
            "I*({x}) = {:.4} ± {:.4}  I^F={:.4} KL={:.4} weights={:?}",
            r.value, r.stderr, r.i_f, r.kl, r.argmin_weights
        );
    }
    let xs = x_star(5.0, &p, &XStarConfig { i_star: cfg, ..XStarConfig::default() })?;
    println!("x*(5) = {:.3} in [{:.3}, {:.3}] (restricted family: {})", xs.point, xs.lo, xs.hi, xs.restricted_family);
    Ok(())
}
