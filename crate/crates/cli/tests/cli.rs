use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use keyhole_cli::{diff_results, run, ExperimentConfig, RunOptions};
use keyhole_core::analytic::los_integral_2d;
use keyhole_core::channel::ChannelParams;

const SMALL: &str = r#"
kind = "sweep-h"
name = "small"

[domain]
dimension = 2
length = 5.0

[[domain.holes]]
x = 2.5
phi = "pi/16"
depth = 0.2

[channel]
k_factor = 4.0
beta = 1.0
eta = 2.0
alpha = [0.5, 1.0]

[grid]
start = 0.1
stop = 1.0
steps = 4
spacing = "log"

[sim]
trials = 50
seed = 11
reflections = [0, 1, 2]
nodes = 100
"#;

fn keyhole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keyhole"))
        .args(args)
        .env_remove("KEYHOLE_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_to(dir: &Path, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    keyhole(&args)
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn shipped_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_validate() {
    let configs = shipped_configs();
    assert!(configs.len() >= 5);
    for p in configs {
        let o = keyhole(&["validate", p.to_str().unwrap()]);
        assert_eq!(
            code(&o),
            0,
            "{}: {}",
            p.display(),
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("kind = \"sweep-h\"", "kind = \"validate\"")
        .replace("steps = 4", "steps = 0");
    let cfg = write_config(dir.path(), "empty.toml", &text);
    let o = keyhole(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.steps"));
    assert_eq!(code(&run_to(dir.path(), &cfg, &[])), 2);
    assert!(!dir.path().join("small.csv").exists());
}

#[test]
fn bad_inputs_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(
        dir.path(),
        "typo.toml",
        &SMALL.replace("eta = 2.0", "eta = 2.0\ngain = 1.0"),
    );
    assert_eq!(code(&keyhole(&["validate", typo.to_str().unwrap()])), 2);
    let alpha = write_config(
        dir.path(),
        "alpha.toml",
        &SMALL.replace("[0.5, 1.0]", "[1.5]"),
    );
    assert_eq!(code(&run_to(dir.path(), &alpha, &[])), 2);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&keyhole(&["validate", missing.to_str().unwrap()])), 4);
}

#[test]
fn csv_schema_and_los_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    assert_eq!(code(&run_to(dir.path(), &cfg, &[])), 0);
    let (header, rows) = read_rows(&dir.path().join("small.csv"));
    assert_eq!(
        header,
        [
            "experiment",
            "h",
            "rho",
            "alpha",
            "C",
            "analytic_c0",
            "analytic_c1",
            "analytic_c2",
            "analytic_total",
            "mc_mean",
            "mc_stderr",
            "trials",
            "seconds"
        ]
    );
    assert_eq!(rows.len(), 4 * 2 * 3);
    for r in &rows {
        let h: f64 = r[1].parse().unwrap();
        let alpha: f64 = r[3].parse().unwrap();
        let c: usize = r[4].parse().unwrap();
        let params = ChannelParams::new(4.0, 1.0, 2.0, alpha).unwrap();
        let phi = 2.0 * (2.0 * 0.2 * (PI / 32.0).tan() / 0.4).atan();
        let los = los_integral_2d(&params, h, phi).unwrap();
        assert!((r[5].parse::<f64>().unwrap() - los).abs() <= 1e-15 * los.abs());
        for k in 0..3 {
            assert_eq!(r[5 + k].is_empty(), k > c);
        }
        let sum: f64 = (0..=c).map(|k| r[5 + k].parse::<f64>().unwrap()).sum();
        assert_eq!(r[8].parse::<f64>().unwrap(), sum);
        assert_eq!(r[11], "50");
        // 17 significant digits.
        assert_eq!(r[8].split('e').next().unwrap().len(), 18);
    }
    assert!(dir.path().join("small.manifest.toml").exists());
}

#[test]
fn reruns_and_manifests_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    assert_eq!(code(&run_to(&a, &cfg, &["--threads", "1"])), 0);
    assert_eq!(code(&run_to(&b, &cfg, &["--threads", "3"])), 0);
    let manifest = a.join("small.manifest.toml");
    assert_eq!(code(&run_to(&c, &manifest, &[])), 0);

    let (ca, cb, cc) = (
        a.join("small.csv"),
        b.join("small.csv"),
        c.join("small.csv"),
    );
    assert!(diff_results(&ca, &cb, 0.0).unwrap().is_empty());
    assert!(diff_results(&ca, &cc, 0.0).unwrap().is_empty());
    let o = keyhole(&["diff", ca.to_str().unwrap(), cc.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
}

#[test]
fn seed_override_only_moves_monte_carlo_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    assert_eq!(code(&run_to(&a, &cfg, &[])), 0);
    assert_eq!(code(&run_to(&b, &cfg, &["--seed", "12"])), 0);
    let (ca, cb) = (a.join("small.csv"), b.join("small.csv"));
    let report = diff_results(&ca, &cb, 0.0).unwrap();
    assert_eq!(report.columns(), ["mc_mean", "mc_stderr"]);
    let o = keyhole(&["diff", ca.to_str().unwrap(), cb.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("mc_mean"));
    let loose = keyhole(&[
        "diff",
        ca.to_str().unwrap(),
        cb.to_str().unwrap(),
        "--rel-tol",
        "10",
    ]);
    assert_eq!(code(&loose), 0);
    let manifest = std::fs::read_to_string(b.join("small.manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 12"));
}

#[test]
fn diff_rejects_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let other = write_config(
        dir.path(),
        "other.toml",
        &SMALL
            .replace("[0, 1, 2]", "[0, 1]")
            .replace("\"small\"", "\"other\""),
    );
    assert_eq!(code(&run_to(dir.path(), &cfg, &[])), 0);
    assert_eq!(code(&run_to(dir.path(), &other, &[])), 0);
    let (a, b) = (dir.path().join("small.csv"), dir.path().join("other.csv"));
    assert_eq!(
        code(&keyhole(&[
            "diff",
            a.to_str().unwrap(),
            b.to_str().unwrap()
        ])),
        2
    );
    let junk = write_config(dir.path(), "junk.csv", "x,y\n1,2\n");
    assert_eq!(
        code(&keyhole(&[
            "diff",
            a.to_str().unwrap(),
            junk.to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn validate_kind_reports_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("kind = \"sweep-h\"", "kind = \"validate\"")
        .replace("trials = 50", "trials = 400")
        .replace("[0, 1, 2]", "[2]");
    let cfg = write_config(dir.path(), "v.toml", &text);
    let o = run_to(dir.path(), &cfg, &[]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
            .count(),
        8
    );
    assert_eq!(code(&o), if stdout.contains("FAIL") { 1 } else { 0 });
}

#[test]
fn density_sweep_is_monotone_and_saturates() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/five_holes.toml");
    let mut cfg = ExperimentConfig::load(&path).unwrap();
    cfg.sim.trials = 0;
    cfg.grid.stop = 2000.0;
    cfg.grid.steps = 41;
    let result = run(&cfg, &RunOptions::default()).unwrap();
    for c in [0, 2] {
        let curve: Vec<f64> = result
            .rows
            .iter()
            .filter(|r| r.c == c)
            .map(|r| r.analytic_total)
            .collect();
        assert_eq!(curve[0], 0.0);
        assert!(curve.windows(2).all(|w| w[1] >= w[0]));
        assert!(curve.last().unwrap() > &0.99);
        assert!(result.rows.iter().all(|r| r.mc.is_none()));
    }
}

#[test]
fn threads_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let o = Command::new(env!("CARGO_BIN_EXE_keyhole"))
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("KEYHOLE_THREADS", "0x")
        .output()
        .unwrap();
    // Invalid value is rejected by argument parsing.
    assert_ne!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_keyhole"))
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("KEYHOLE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn numeric_failure_keeps_partial_output() {
    // The Marcum fit is calibrated for small a = √(2K); at K = 1e6 it
    // degenerates and λ_c is not a number.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "k.toml",
        &SMALL.replace("k_factor = 4.0", "k_factor = 1e6"),
    );
    let o = run_to(dir.path(), &cfg, &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_rows(&dir.path().join("small.csv"));
    assert_eq!(header[0], "experiment");
    assert!(rows.len() < 24);
    let manifest = std::fs::read_to_string(dir.path().join("small.manifest.toml")).unwrap();
    assert!(manifest.contains("# status = numeric-error"));
}
