//! Properties that tie several modules together.

use proptest::prelude::*;
use rwre_lab::chi_estimator::{chi_mc, integrand};
use rwre_lab::conditioned_env::{hat_l_from_profile, hat_l_transform, hat_transform};
use rwre_lab::env_model::{sample_environment, Environment, EnvironmentDistribution};
use rwre_lab::hitting_kernels::hit_prob_dp;
use rwre_lab::potential::{build_profile, PotentialProfile};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windowed_transform_agrees_with_shifted_profile(seed in 0u64..10_000, l in 1usize..20, i in 25i64..60) {
        let env = sample_environment(&EnvironmentDistribution::standard(), 0, 80, seed);
        let w = hat_l_transform(&env, l, i, i).unwrap();
        // a profile anchored at i − L sees exactly the window [i − L + 1, i]
        let prof = PotentialProfile::build(&env, i - l as i64, l + 2).unwrap();
        let from_profile = hat_l_from_profile(&prof, l, l).unwrap();
        prop_assert!((w.right(i) - from_profile).abs() < 1e-12);
    }

    #[test]
    fn hit_probability_grows_with_time(seed in 0u64..10_000, m in 2i64..30, k in 1usize..60) {
        let env = sample_environment(&EnvironmentDistribution::standard(), 0, 40, seed);
        let hat = hat_transform(&build_profile(&env, 35).unwrap(), 33).unwrap();
        let a = hit_prob_dp(&hat, 1, m, k).unwrap().p_hit;
        let b = hit_prob_dp(&hat, 1, m, k + 1).unwrap().p_hit;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn integrand_stays_in_unit_interval(p in 0.0f64..=1.0, g in 0.0f64..=1.0) {
        let v = integrand(p, g);
        prop_assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn near_deterministic_environment_crosses_fast() {
    let env = Environment::constant(0, 500, 0.9, 0.1).unwrap();
    let hat = hat_transform(&build_profile(&env, 450).unwrap(), 400).unwrap();
    let p = hit_prob_dp(&hat, 1, 200, 400).unwrap().p_hit;
    assert!(p > 1.0 - 1e-12, "{p}");
}

#[test]
fn chi_beyond_unit_speed_is_exactly_zero() {
    let p = EnvironmentDistribution::standard();
    assert_eq!(chi_mc(&p, 50, 1.2, 4.0, 100, 1).unwrap().mean, 0.0);
}
