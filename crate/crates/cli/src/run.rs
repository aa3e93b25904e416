//! Executes an experiment config into result rows.

use std::time::Instant;

use keyhole_core::analytic::{expected_external_h, external_connect_prob, AnalyticError};
use keyhole_core::geometry::{
    region_measure, region_measures_monte_carlo, KeyholeDomain, RegionMethod,
};
use keyhole_core::montecarlo::{
    all_externals_connected_prob, external_mean_degree, NodeCount, SimError,
};
use keyhole_core::rng::derive_seed;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};

/// One grid point × α × C.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub h: f64,
    pub rho: Option<f64>,
    pub alpha: f64,
    pub c: u32,
    /// Per-order analytic values for `0..=c`.
    pub analytic: Vec<f64>,
    pub analytic_total: f64,
    pub mc: Option<McCell>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCell {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Largest C in the run; fixes the number of `analytic_c*` columns.
    pub max_c: u32,
    pub rows: Vec<Row>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Rows finished before the failure are kept in `partial`.
    #[error("numeric failure at grid point {index}: {message}")]
    Numeric {
        index: usize,
        message: String,
        partial: SweepResult,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Runs every row of `cfg`. Grid point `i` uses the sub-seed
/// `derive_seed(seed, i)` for all α and C, so curves for different C share
/// node placements.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult, RunError> {
    cfg.validate()?;
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::ThreadPool(e.to_string()))?
            .install(|| run_rows(cfg, opts)),
        None => run_rows(cfg, opts),
    }
}

enum Failure {
    Analytic(AnalyticError),
    Sim(SimError),
    Config(ConfigError),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Analytic(e) => e.fmt(f),
            Self::Sim(e) => e.fmt(f),
            Self::Config(e) => e.fmt(f),
        }
    }
}

fn run_rows(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult, RunError> {
    let seed = opts.seed.unwrap_or(cfg.sim.seed);
    let grid = cfg.grid_points()?;
    let mut result = SweepResult {
        max_c: cfg.max_reflections(),
        rows: Vec::new(),
    };
    for (index, &x) in grid.iter().enumerate() {
        let sub_seed = derive_seed(seed, index as u64);
        for &alpha in &cfg.channel.alpha {
            for &c in &cfg.sim.reflections {
                let start = Instant::now();
                match row(cfg, x, alpha, c, sub_seed) {
                    Ok(mut r) => {
                        r.seconds = start.elapsed().as_secs_f64();
                        result.rows.push(r);
                    }
                    Err(Failure::Config(e)) => return Err(e.into()),
                    Err(e) => {
                        return Err(RunError::Numeric {
                            index,
                            message: e.to_string(),
                            partial: result,
                        })
                    }
                }
            }
        }
    }
    Ok(result)
}

fn row(cfg: &ExperimentConfig, x: f64, alpha: f64, c: u32, seed: u64) -> Result<Row, Failure> {
    let params = cfg.channel_params(alpha).map_err(Failure::Config)?;
    let height = if cfg.sweeps_height() {
        x
    } else {
        cfg.domain.height.unwrap_or_default()
    };
    let domain = cfg.domain_at(height).map_err(Failure::Config)?;
    let mc_on = cfg.sim.trials > 0;
    let mut out = Row {
        experiment: cfg.name(),
        h: height,
        rho: None,
        alpha,
        c,
        analytic: Vec::new(),
        analytic_total: 0.0,
        mc: None,
        seconds: 0.0,
    };
    match cfg.kind {
        ExperimentKind::SweepH | ExperimentKind::Sweep3d | ExperimentKind::Validate => {
            let hole = &domain.holes()[0];
            let b = expected_external_h(&domain, hole, &params, c).map_err(Failure::Analytic)?;
            out.analytic = b.per_c;
            out.analytic_total = b.total_unnormalized;
            if mc_on {
                let sim = cfg.sim_config(cfg.node_count(), c, seed, None);
                out.rho = Some(sim.density(domain.volume()));
                let e = external_mean_degree(&domain, hole, &params, &sim).map_err(Failure::Sim)?;
                out.mc = Some(McCell {
                    mean: e.mean,
                    std_error: e.std_error,
                    trials: e.trials,
                });
            }
        }
        ExperimentKind::SweepDensity => {
            let rho = x;
            let mut per_c = vec![0.0; c as usize + 1];
            let mut mean_degrees = Vec::with_capacity(domain.holes().len());
            for hole in domain.holes() {
                let b =
                    expected_external_h(&domain, hole, &params, c).map_err(Failure::Analytic)?;
                for (acc, v) in per_c.iter_mut().zip(&b.per_c) {
                    *acc += v;
                }
                mean_degrees.push(b.mean_degree(rho));
            }
            out.analytic = per_c;
            out.analytic_total = mean_degrees
                .iter()
                .map(|&m| external_connect_prob(m))
                .product();
            let sim = cfg.sim_config(NodeCount::Density(rho), c, seed, None);
            out.rho = Some(sim.density(domain.volume()));
            if mc_on {
                let e =
                    all_externals_connected_prob(&domain, &params, &sim).map_err(Failure::Sim)?;
                out.mc = Some(McCell {
                    mean: e.mean,
                    std_error: e.std_error,
                    trials: e.trials,
                });
            }
        }
        ExperimentKind::MeasureRegions => {
            let hole = &domain.holes()[0];
            out.analytic = (0..=c)
                .map(|k| {
                    region_measure(k, &domain, hole, RegionMethod::AnalyticApprox).map(|m| m.value)
                })
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Analytic(e.into()))?;
            out.analytic_total = out.analytic.iter().sum();
            if mc_on {
                let samples = cfg.sim.samples.unwrap_or(0);
                out.mc = Some(measure_total(c, &domain, samples, seed).map_err(Failure::Analytic)?);
            }
        }
    }
    Ok(out)
}

/// Monte Carlo `Σ_{k≤c} |D_k|`. The counts share one multinomial sample, so
/// their covariances are negative and the summed variance bounds the true
/// one from above.
fn measure_total(
    c: u32,
    domain: &KeyholeDomain,
    samples: u64,
    seed: u64,
) -> Result<McCell, AnalyticError> {
    let m = region_measures_monte_carlo(c, domain, &domain.holes()[0], samples, seed)?;
    Ok(McCell {
        mean: m.iter().map(|r| r.value).sum(),
        std_error: m
            .iter()
            .map(|r| r.std_error * r.std_error)
            .sum::<f64>()
            .sqrt(),
        trials: samples,
    })
}

/// Agreement test used by the `validate` kind: `|mc − analytic| ≤ 3σ + 2%`.
pub fn row_agrees(row: &Row) -> Option<bool> {
    let mc = row.mc?;
    let diff = (mc.mean - row.analytic_total).abs();
    Some(diff <= 3.0 * mc.std_error + 0.02 * row.analytic_total.abs())
}
