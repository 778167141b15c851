//! Exact fast-crossing probabilities and the first-passage generating
//! functions behind the finite-k rates.
//!
//! cargo run --release --example hitting

use rwre_lab::conditioned_env::hat_transform;
use rwre_lab::env_model::{sample_environment, EnvironmentDistribution};
use rwre_lab::hitting_kernels::{hit_prob_dp, i_hat, phi_sweep, IHatConfig, IHatVariant};
use rwre_lab::potential::build_profile;

fn main() -> rwre_lab::Result<()> {
    let p = EnvironmentDistribution::standard();
    let (x, k) = (0.6, 400usize);
    let xk = (x * k as f64) as usize;
    let env = sample_environment(&p, -2000, 2000 + xk + 2, 5);
    let hat = hat_transform(&build_profile(&env, xk + 1)?, xk as i64)?;

    let dp = hit_prob_dp(&hat, 1, xk as i64, k)?;
    println!("P_1[tau_{xk} <= {k}] = {:.4e}  -(1/k) log = {:.4}", dp.p_hit, -dp.p_hit.ln() / k as f64);

    let table = phi_sweep(&hat, 1, xk as i64 - 1, -0.2, 0)?;
    println!("sum log phi(-0.2) over [1, {}] = {:.4}", xk - 1, table.sum());

    let cfg = IHatConfig::default();
    for v in [IHatVariant::J(1), IHatVariant::JM(1, 3f64.exp()), IHatVariant::JL(1, 16), IHatVariant::JL(1, 64)] {
        let r = i_hat(v, &env, x, k, &cfg)?;
        println!("{v:?}: {:.5} at lambda={:.4}", r.value, r.lambda_star);
    }
    Ok(())
}
