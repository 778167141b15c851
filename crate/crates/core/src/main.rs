use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rwre_lab::harness::{exit_code, run, ExperimentConfig, ExperimentKind};

/// Runs one experiment from a TOML config.
#[derive(Parser)]
#[command(name = "rwre-lab", version)]
struct Cli {
    /// er-classic, er-rwre, chi, chi-slope, rate-im, rate-if, rate-istar,
    /// xstar, hitprob or selftest
    #[arg(value_parser = |s: &str| s.parse::<ExperimentKind>().map_err(|e| e.to_string()))]
    experiment: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ExperimentConfig::load(&cli.config)
        .and_then(|c| c.resolve(cli.experiment, cli.seed, cli.workers, cli.out))
        .and_then(|c| run(&c).map(|o| (c, o)));
    match result {
        Ok((cfg, out)) => {
            println!("{} done in {:.1}s", cfg.kind(), out.manifest.wall_time_seconds);
            println!("manifest: {}", cfg.out_dir.join("manifest.json").display());
            if out.manifest.failures > 0 {
                println!("excluded failures: {}", out.manifest.failures);
            }
            if out.invariant_failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &out.invariant_failures {
                    eprintln!("FAIL {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
