//! Running an experiment from a TOML string, as the binary does.
//!
//! cargo run --release --example run_config

use rwre_lab::harness::{run, ExperimentConfig, ExperimentKind};

const CONFIG: &str = r#"
seed = 3
workers = 2

[params]
x = 0.6
k_grid = [100, 200, 400]
envs = 10
n_sites = 5000
"#;

fn main() -> rwre_lab::Result<()> {
    let out = std::env::temp_dir().join("rwre-lab-hitprob");
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?.resolve(ExperimentKind::Hitprob, None, None, Some(out.clone()))?;
    println!("config hash {}", cfg.hash());
    let o = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&o.summary).unwrap());
    for f in &o.manifest.outputs {
        println!("{}  {}", f.sha256, f.path);
    }
    println!("written to {}", out.display());
    Ok(())
}
