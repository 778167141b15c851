//! Monte Carlo estimate of chi(k, x, c) and its decay rate in k.
//!
//! cargo run --release --example chi

use rwre_lab::chi_estimator::{chi_mc, chi_slope_multi, ChiOptions};
use rwre_lab::env_model::EnvironmentDistribution;

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let e = chi_mc(&p, 200, 0.6, 4.0, 2000, 1)?;
    println!("chi(200, 0.6, 4) = {:.4e} ± {:.1e}", e.mean, e.stderr);

    let opts = ChiOptions { antithetic: true, ..ChiOptions::default() };
    for s in chi_slope_multi(&p, 0.6, &[4.0, 8.0], &[100, 200, 300], 20000, 1, opts)? {
        println!("c={}: slope {:.4} ± {:.4}", s.c, s.slope, s.slope_stderr);
    }
    Ok(())
}
