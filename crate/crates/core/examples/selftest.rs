//! The randomized invariant battery with its two negative controls.
//!
//! cargo run --release --example selftest

use rwre_lab::harness::battery::{run_battery, sdecomp, w_recursion, BatterySizes};

fn main() {
    for r in run_battery(BatterySizes::scaled(40), 1, false, false) {
        println!(
            "{:<5} {:<32} n={:<4} violations={} worst={:.2e} {}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.instances,
            r.violations,
            r.worst,
            r.note
        );
    }
    println!("corrupted profile passes: {}", sdecomp(20, 1, true).passed());
    println!("single precision passes: {}", w_recursion(20, 1, true).passed());
}
