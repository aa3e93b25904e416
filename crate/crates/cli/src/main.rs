use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use keyhole_cli::config::{ExperimentKind, LoadError};
use keyhole_cli::run::row_agrees;
use keyhole_cli::{
    diff_results, exit, output, run, DiffError, ExperimentConfig, RunError, RunOptions, SweepResult,
};

#[derive(Parser)]
#[command(name = "keyhole", version, about = "Keyhole connectivity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV and manifest.
    Run {
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `sim.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; falls back to KEYHOLE_THREADS.
        #[arg(long, env = "KEYHOLE_THREADS")]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Compare two results CSVs, ignoring the `seconds` column.
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        rel_tol: f64,
    },
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => cmd_run(&config, out.as_deref(), seed, threads),
        Command::Validate { config } => cmd_validate(&config),
        Command::Diff { a, b, rel_tol } => cmd_diff(&a, &b, rel_tol),
    };
    ExitCode::from(code as u8)
}

fn load(path: &Path) -> Result<ExperimentConfig, i32> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            LoadError::Io(..) => exit::IO,
            LoadError::Config(_) => exit::CONFIG,
        }
    })
}

fn cmd_validate(path: &Path) -> i32 {
    match load(path) {
        Ok(cfg) => {
            let points = cfg.grid_points().map(|g| g.len()).unwrap_or(0);
            let rows = points * cfg.channel.alpha.len() * cfg.sim.reflections.len();
            println!("config ok: {} ({rows} rows)", cfg.kind);
            exit::OK
        }
        Err(code) => code,
    }
}

fn cmd_run(path: &Path, out: Option<&Path>, seed: Option<u64>, threads: Option<usize>) -> i32 {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Ok(domain) = cfg.domain_at(
        cfg.domain
            .height
            .or(cfg.grid_points().ok().map(|g| g[0]))
            .unwrap_or(1.0),
    ) {
        for w in domain.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let effective_seed = seed.unwrap_or(cfg.sim.seed);
    let (result, status, code) = match run(&cfg, &RunOptions { seed, threads }) {
        Ok(r) => (r, "ok", exit::OK),
        Err(RunError::Numeric {
            index,
            message,
            partial,
        }) => {
            eprintln!("error: numeric failure at grid point {index}: {message}");
            (partial, "numeric-error", exit::NUMERIC)
        }
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            return exit::CONFIG;
        }
        Err(e @ RunError::ThreadPool(_)) => {
            eprintln!("error: {e}");
            return exit::CONFIG;
        }
    };
    let csv = output::csv_path(&cfg, out);
    let written = output::write_atomic(&csv, &output::to_csv_bytes(&result)).and_then(|_| {
        output::write_atomic(
            &output::manifest_path(&csv),
            output::manifest(&cfg, effective_seed, status).as_bytes(),
        )
    });
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", csv.display());
        return exit::IO;
    }
    println!("wrote {} rows to {}", result.rows.len(), csv.display());
    if code == exit::OK && cfg.kind == ExperimentKind::Validate {
        return report_validation(&result);
    }
    code
}

fn report_validation(result: &SweepResult) -> i32 {
    let mut failed = 0;
    for r in &result.rows {
        let Some(ok) = row_agrees(r) else { continue };
        let mc = r.mc.expect("validate rows carry Monte Carlo");
        println!(
            "{} h={:.4} alpha={} C={}: analytic {:.6e} mc {:.6e} ± {:.2e}",
            if ok { "PASS" } else { "FAIL" },
            r.h,
            r.alpha,
            r.c,
            r.analytic_total,
            mc.mean,
            mc.std_error
        );
        failed += usize::from(!ok);
    }
    if failed > 0 {
        eprintln!("{failed} of {} rows disagree", result.rows.len());
        exit::MISMATCH
    } else {
        exit::OK
    }
}

fn cmd_diff(a: &Path, b: &Path, rel_tol: f64) -> i32 {
    match diff_results(a, b, rel_tol) {
        Ok(report) if report.is_empty() => exit::OK,
        Ok(report) => {
            print!("{report}");
            exit::MISMATCH
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                DiffError::Io { .. } => exit::IO,
                DiffError::Schema(_) => exit::CONFIG,
            }
        }
    }
}
