//! Results CSV and run manifest.
//!
//! Column order: `experiment, h, rho, alpha, C, analytic_c0..analytic_c{Cmax},
//! analytic_total, mc_mean, mc_stderr, trials, seconds`. Floats carry 17
//! significant digits; cells that do not apply are empty.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::config::ExperimentConfig;
use crate::run::SweepResult;

pub fn header(max_c: u32) -> Vec<String> {
    let mut cols: Vec<String> = ["experiment", "h", "rho", "alpha", "C"]
        .map(String::from)
        .to_vec();
    cols.extend((0..=max_c).map(|c| format!("analytic_c{c}")));
    cols.extend(
        [
            "analytic_total",
            "mc_mean",
            "mc_stderr",
            "trials",
            "seconds",
        ]
        .map(String::from),
    );
    cols
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn to_csv_bytes(result: &SweepResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(result.max_c))
        .expect("in-memory write");
    for r in &result.rows {
        let mut rec = vec![
            r.experiment.clone(),
            float(r.h),
            opt(r.rho),
            float(r.alpha),
            r.c.to_string(),
        ];
        rec.extend((0..=result.max_c as usize).map(|k| opt(r.analytic.get(k).copied())));
        rec.push(float(r.analytic_total));
        rec.push(opt(r.mc.map(|m| m.mean)));
        rec.push(opt(r.mc.map(|m| m.std_error)));
        rec.push(r.mc.map(|m| m.trials.to_string()).unwrap_or_default());
        rec.push(format!("{:.6}", r.seconds));
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Resolved CSV path of a run.
pub fn csv_path(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> PathBuf {
    let file = cfg
        .output
        .clone()
        .unwrap_or_else(|| format!("{}.csv", cfg.name()));
    let file = PathBuf::from(file);
    match out_dir {
        Some(dir) if file.is_relative() => dir.join(file),
        _ => file,
    }
}

/// `results.csv` → `results.manifest.toml`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.toml")
}

/// The effective config (seed override applied) behind a comment header.
/// The manifest is itself a valid config and re-runs the experiment.
pub fn manifest(cfg: &ExperimentConfig, seed: u64, status: &str) -> String {
    let mut effective = cfg.clone();
    effective.sim.seed = seed;
    format!(
        "# keyhole-cli {}\n# keyhole-core {}\n# seed = {seed}\n# status = {status}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        keyhole_core::VERSION,
        effective.to_toml()
    )
}
