//! Potential, Lyapunov sums and exact exit probabilities.
//!
//! cargo run --example potential

use rwre_lab::env_model::{make_two_point, sample_environment, EnvironmentDistribution};
use rwre_lab::potential::{build_profile, delta_eps, hit_prob_ratio, s_minus_inf, w_bound, w_value, xi_bar};

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let env = sample_environment(&p, -2000, 3000, 7);
    let prof = build_profile(&env, 400)?;

    for n in [1, 2, 5, 10, 50, 200, 400] {
        println!(
            "n={n:>3}  V={:>8.3}  log S={:>7.3}  W={:.4}  bound={:.4}",
            prof.v(n),
            prof.log_s(n),
            w_value(&prof, n),
            w_bound(p.kappa(), n)
        );
    }
    println!("P_5[hit 50 before 0] = {:.6}", hit_prob_ratio(&prof, 5, 50)?);

    // S(−∞) = Σ_{j≥1} e^{V(−j)} diverges here since V grows to the left
    let sm = s_minus_inf(&env, 1e-12, 2000);
    println!("log S(-inf) truncated at {} terms: {:.1} (converged: {})", sm.depth, sm.log_value, sm.converged);
    // and converges under the mirrored law
    let mirrored = make_two_point(1.0 / 3.0, 2.0 / 3.0, 0.8, 0.1)?;
    let menv = sample_environment(&mirrored, -2000, 3000, 7);
    let sm = s_minus_inf(&menv, 1e-12, 2000);
    println!("mirrored: log S(-inf) = {:.6} after {} terms (converged: {})", sm.log_value, sm.depth, sm.converged);
    println!("mirrored: xi_bar(10) = {:.6}", xi_bar(&menv, 10, 1e-12, 2000)?);

    let d = delta_eps(&env, 200, 0.5, 4.0, 0.05)?;
    println!(
        "-(1/k) log S(xk)/S(ck) = {:.5} in [{:.5}, {:.5}] (delta_eps={:.4}, Delta_eps={:.4})",
        d.target, d.lower, d.upper, d.delta, d.big_delta
    );
    Ok(())
}
