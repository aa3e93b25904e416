//! Monte Carlo validation: uniform node placement, external-node degrees,
//! all-externals-connected events and interior mesh connectivity.
//!
//! Trial `t` draws from its own ChaCha8 stream `(seed, t)`, and per-trial
//! results are reduced in trial order, so estimates are bit-identical for
//! any thread count.

mod estimate;

pub use estimate::EstimateWithCI;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{ChannelParams, ConnectionModel, LinkMode};
use crate::geometry::{classify_path, Dimension, GeometryError, KeyholeDomain, KeyholeSpec, Point};
use crate::rng::{stream_rng, StreamRng};

/// Default cap on the node count of the O(N²) interior mesh check.
pub const DEFAULT_MESH_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("interior mesh with {nodes} nodes exceeds the cap of {cap}")]
    TooManyNodes { nodes: usize, cap: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Number of interior nodes per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeCount {
    Fixed(usize),
    /// Nodes per unit area/volume; `N = round(ρV)`.
    Density(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Average the link probabilities of the sampled placement.
    #[default]
    SemiAnalytic,
    /// Sample every link as a Bernoulli variable.
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nodes: NodeCount,
    pub trials: u64,
    pub seed: u64,
    pub link_mode: LinkMode,
    pub max_reflections: u32,
    pub estimator: Estimator,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub mesh_cap: usize,
}

impl SimConfig {
    pub fn new(nodes: NodeCount, trials: u64, seed: u64) -> Self {
        Self {
            nodes,
            trials,
            seed,
            link_mode: LinkMode::Approx,
            max_reflections: 2,
            estimator: Estimator::SemiAnalytic,
            threads: None,
            mesh_cap: DEFAULT_MESH_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be >= 1".into()));
        }
        if let NodeCount::Density(rho) = self.nodes {
            if !(rho >= 0.0) || !rho.is_finite() {
                return Err(SimError::InvalidConfig(format!(
                    "density must be finite and >= 0, got {rho}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(SimError::InvalidConfig("threads must be >= 1".into()));
        }
        Ok(())
    }

    /// `N` for a domain of measure `volume`.
    pub fn node_count(&self, volume: f64) -> usize {
        match self.nodes {
            NodeCount::Fixed(n) => n,
            NodeCount::Density(rho) => (rho * volume).round() as usize,
        }
    }

    /// `ρ = N / V` as actually simulated.
    pub fn density(&self, volume: f64) -> f64 {
        self.node_count(volume) as f64 / volume
    }
}

/// `n` i.i.d. uniform points in the domain. The hole shafts lie outside
/// the domain, so no rejection is needed to exclude them.
pub fn place_nodes(domain: &KeyholeDomain, n: usize, rng: &mut StreamRng) -> Vec<Point> {
    let (l, b, h) = (domain.length(), domain.breadth(), domain.height());
    (0..n)
        .map(|_| match domain.dimension() {
            Dimension::Two => Point::planar(rng.random_range(0.0..l), rng.random_range(0.0..h)),
            Dimension::Three => Point::spatial(
                rng.random_range(0.0..l),
                rng.random_range(0.0..b),
                rng.random_range(0.0..h),
            ),
        })
        .collect()
}

/// Evaluates `trial` for every trial index in parallel and returns the
/// results in trial order.
fn run_trials<F>(sim: &SimConfig, trial: F) -> Result<Vec<f64>, SimError>
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let body = || -> Vec<f64> {
        (0..sim.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(sim.seed, t);
                trial(&mut rng)
            })
            .collect()
    };
    match sim.threads {
        None => Ok(body()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))
            .map(|pool| pool.install(body)),
    }
}

/// Link probability to `hole` of every node, zero for nodes it cannot see.
/// One uniform is always drawn per node so that configurations differing
/// only in `max_reflections` consume identical random streams.
fn sample_links(
    nodes: &[Point],
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    model: &ConnectionModel,
    max_c: u32,
    rng: &mut StreamRng,
) -> Vec<(f64, f64)> {
    nodes
        .iter()
        .map(|p| {
            let u: f64 = rng.random();
            let prob = classify_path(p, domain, hole, max_c)
                .ok()
                .flatten()
                .map_or(0.0, |pc| model.prob(pc.distance, pc.reflections));
            (prob, u)
        })
        .collect()
}

/// Mean degree of the external node at `hole` divided by the density,
/// directly comparable with the analytic `V⟨H_ki⟩`.
pub fn external_mean_degree(
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    params: &ChannelParams,
    sim: &SimConfig,
) -> Result<EstimateWithCI, SimError> {
    sim.validate()?;
    let model = ConnectionModel::new(*params, sim.link_mode);
    let n = sim.node_count(domain.volume());
    if n == 0 {
        return Ok(EstimateWithCI::from_values(&vec![0.0; sim.trials as usize]));
    }
    let rho = sim.density(domain.volume());
    let values = run_trials(sim, |rng| {
        let nodes = place_nodes(domain, n, rng);
        let links =
            sample_links(&nodes, domain, hole, &model, sim.max_reflections, rng).into_iter();
        let degree: f64 = match sim.estimator {
            Estimator::SemiAnalytic => links.map(|(p, _)| p).sum(),
            Estimator::Bernoulli => links.filter(|&(p, u)| u < p).count() as f64,
        };
        degree / rho
    })?;
    Ok(EstimateWithCI::from_values(&values))
}

/// Probability that every external node of the domain links to at least
/// one interior node.
pub fn all_externals_connected_prob(
    domain: &KeyholeDomain,
    params: &ChannelParams,
    sim: &SimConfig,
) -> Result<EstimateWithCI, SimError> {
    sim.validate()?;
    if domain.holes().is_empty() {
        return Err(SimError::InvalidConfig("domain has no holes".into()));
    }
    let model = ConnectionModel::new(*params, sim.link_mode);
    let n = sim.node_count(domain.volume());
    let values = run_trials(sim, |rng| {
        let nodes = place_nodes(domain, n, rng);
        domain
            .holes()
            .iter()
            .map(|hole| {
                let links = sample_links(&nodes, domain, hole, &model, sim.max_reflections, rng)
                    .into_iter();
                match sim.estimator {
                    Estimator::SemiAnalytic => 1.0 - links.map(|(p, _)| 1.0 - p).product::<f64>(),
                    Estimator::Bernoulli => {
                        if links.into_iter().any(|(p, u)| u < p) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            })
            .product()
    })?;
    Ok(EstimateWithCI::probability(&values))
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.components -= 1;
    }
}

fn distance(a: &Point, b: &Point) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Probability that the interior nodes form one cluster, with every pair
/// linked independently with probability `H^(0)(r_ij)`. The semi-analytic
/// estimator has no closed form here, so links are always sampled.
pub fn interior_mesh_connectivity(
    domain: &KeyholeDomain,
    params: &ChannelParams,
    sim: &SimConfig,
) -> Result<EstimateWithCI, SimError> {
    sim.validate()?;
    let n = sim.node_count(domain.volume());
    if n > sim.mesh_cap {
        return Err(SimError::TooManyNodes {
            nodes: n,
            cap: sim.mesh_cap,
        });
    }
    let model = ConnectionModel::new(*params, sim.link_mode);
    let values = run_trials(sim, |rng| {
        let nodes = place_nodes(domain, n, rng);
        let mut dsu = DisjointSet::new(n);
        for i in 0..n {
            for j in i + 1..n {
                let u: f64 = rng.random();
                if u < model.prob(distance(&nodes[i], &nodes[j]), 0) {
                    dsu.union(i, j);
                }
            }
        }
        if dsu.components <= 1 {
            1.0
        } else {
            0.0
        }
    })?;
    Ok(EstimateWithCI::probability(&values))
}
