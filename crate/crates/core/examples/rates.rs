//! Cramér rates, the potential-increment rate I_m, the root s and the
//! finite-L rate I^F.
//!
//! cargo run --release --example rates

use rwre_lab::env_model::{ballistic_summary, EnvironmentDistribution};
use rwre_lab::rate_functions::{
    a_alpha, cramer_rate, i_f_ladder, i_m, min_ratio_s, IfConfig, IncrementLaw, ProductMeasure, RateCurve,
};

fn main() -> rwre_lab::Result<()> {
    let coin = IncrementLaw::fair_coin();
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        println!("fair coin: I({alpha}) = {:.5}  A_alpha = {:.4}", cramer_rate(&coin, alpha), a_alpha(&coin, alpha)?);
    }

    let p = EnvironmentDistribution::standard();
    let curve = RateCurve::im(&p, &[-0.6, -0.3, 0.0, 0.3, 0.6]);
    for pt in &curve.points {
        println!("I_m({:>4}) = {:.5}", pt.x, pt.value);
    }
    println!("I_m at mean = {:.2e}", i_m(&p, p.mean_log_rho()).value);
    let mr = min_ratio_s(&p);
    println!(
        "inf I_m(z)/z = {:.8} at z={:.4}; root s = {}",
        mr.value.as_f64(),
        mr.argmin_z.unwrap(),
        ballistic_summary(&p)?.lambda_root_s.as_f64()
    );

    let q = ProductMeasure::of(&p);
    let cfg = IfConfig { n_sites: 5000, ..IfConfig::default() };
    for e in i_f_ladder(0.6, &q, &[1, 4, 16, 64], &cfg)? {
        println!("I^F_L(0.6) L={:>2}: {:.5} ± {:.5}", e.l, e.value, e.stderr);
    }
    Ok(())
}
