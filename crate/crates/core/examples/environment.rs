//! Sampling i.i.d. environments and reading off the ballistic constants.
//!
//! cargo run --example environment

use rwre_lab::env_model::{ballistic_summary, make_two_point, sample_environment, EnvironmentDistribution};

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let b = ballistic_summary(&p)?;
    println!("standard law: kappa={} atoms={:?}", p.kappa(), p.atoms());
    println!("E rho={:.4} E log rho={:.4} s={} v_p={:.4}", b.mean_rho, b.mean_log_rho, b.lambda_root_s.as_f64(), b.velocity);

    let env = sample_environment(&p, -5, 20, 42);
    println!("sample on [{}, {}) id={}", env.lo(), env.hi(), env.identity());
    for i in env.lo()..env.hi() {
        print!("{:.3} ", env.omega(i));
    }
    println!();

    // every ρ-atom below 1: s is infinite
    let strong = make_two_point(0.8, 0.6, 0.5, 0.1)?;
    println!("all-right law: s={:?}", ballistic_summary(&strong)?.lambda_root_s);

    // E ρ ≥ 1 is rejected
    let recurrent = make_two_point(0.6, 0.4, 0.5, 0.1)?;
    println!("symmetric law: {:?}", ballistic_summary(&recurrent).err());
    Ok(())
}
