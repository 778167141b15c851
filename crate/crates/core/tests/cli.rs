//! End-to-end runs of the `rwre-lab` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

fn lab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rwre-lab")).args(args).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn selftest_passes_and_negative_controls_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), "ok.toml", "[params.selftest]\ninstances = 16\n");
    let out = dir.path().join("ok");
    let (code, text) = lab(&["selftest", "--config", &ok, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let csv = fs::read_to_string(out.join("selftest.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with("true")), "{csv}");

    for flag in ["inject_corruption", "reduced_precision"] {
        let bad = write_config(dir.path(), "bad.toml", &format!("[params.selftest]\ninstances = 8\n{flag} = true\n"));
        let out = dir.path().join(flag);
        let (code, text) = lab(&["selftest", "--config", &bad, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 1, "{text}");
        assert!(!manifest(&out)["invariant_failures"].as_array().unwrap().is_empty());
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    let (code, _) = lab(&["chi", "--config", dir.path().join("missing.toml").to_str().unwrap(), "--out", o]);
    assert_eq!(code, 2);
    let typo = write_config(dir.path(), "typo.toml", "[params]\nk_gird = [1, 2]\n");
    assert_eq!(lab(&["chi", "--config", &typo, "--out", o]).0, 2);
    let wrong = write_config(dir.path(), "wrong.toml", "experiment = \"xstar\"\n");
    assert_eq!(lab(&["chi", "--config", &wrong, "--out", o]).0, 2);
    let recurrent = write_config(
        dir.path(),
        "rec.toml",
        "[distribution]\nkappa = 0.1\natoms = [{ omega = 0.4, weight = 0.5 }, { omega = 0.6, weight = 0.5 }]\n",
    );
    assert_eq!(lab(&["chi", "--config", &recurrent, "--out", o]).0, 2);
    let alpha = write_config(dir.path(), "alpha.toml", "[params]\nalpha = 1.5\nn_grid = [1000]\n");
    assert_eq!(lab(&["er-classic", "--config", &alpha, "--out", o]).0, 2);
    assert_eq!(lab(&["no-such-thing", "--config", &alpha]).0, 2);
}

#[test]
fn outputs_are_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[params]\nx_grid = [0.5, 0.6]\nk_grid = [40, 60, 80]\nc_grid = [4.0, 8.0]\nn_samples = 400\n",
    );
    let digests = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let (code, text) = lab(&["chi-slope", "--config", &cfg, "--workers", workers, "--seed", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{text}");
        let m = manifest(&out);
        assert_eq!(m["resolved_config"]["seed"], 5);
        assert!(out.join("checkpoints").read_dir().unwrap().count() >= 6);
        assert!(out.join("plot.json").exists());
        let mut d: Vec<(String, String)> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| (o["path"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
            .collect();
        d.sort();
        (d, m["config_hash"].as_str().unwrap().to_string())
    };
    let (a, ha) = digests("1", "w1");
    let (b, hb) = digests("3", "w3");
    assert_eq!(a, b);
    assert_ne!(ha, hb);
    // rerun into the same directory resumes from checkpoints and reproduces
    let (again, _) = digests("1", "w1");
    assert_eq!(a, again);
}

#[test]
fn classical_and_rate_runs_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[params]\nn_grid = [10000, 100000]\nx_grid = [0.5, 0.7]\nn_sites = 2000\n");
    for (kind, file) in [("er-classic", "er_classic.csv"), ("rate-im", "rate_im.csv"), ("rate-if", "rate_if_ladder.csv")] {
        let out = dir.path().join(kind);
        let (code, text) = lab(&[kind, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{kind}: {text}");
        let table = fs::read_to_string(out.join(file)).unwrap();
        assert!(table.lines().count() >= 3, "{kind}: {table}");
        assert_eq!(manifest(&out)["experiment"], kind);
    }
}
