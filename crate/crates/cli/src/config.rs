//! Experiment configuration files.
//!
//! A config is a TOML document; see `configs/` and the README for the
//! full grammar. Unknown keys are rejected so typos surface as errors.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use keyhole_core::channel::{ChannelParams, LinkMode};
use keyhole_core::geometry::{KeyholeDomain, KeyholeSpec, Wall};
use keyhole_core::montecarlo::{Estimator, NodeCount, SimConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// 2D: `V⟨H_ki⟩` against the domain height.
    SweepH,
    /// P(all external nodes connected) against the node density.
    SweepDensity,
    /// 3D: `V⟨H_ki⟩` against the domain height.
    #[serde(rename = "sweep-3d")]
    Sweep3d,
    /// Like the height sweeps, but every row's Monte Carlo estimate is
    /// checked against the analytic value.
    Validate,
    /// Region measures `|D_c|` against the domain height.
    MeasureRegions,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SweepH => "sweep-h",
            Self::SweepDensity => "sweep-density",
            Self::Sweep3d => "sweep-3d",
            Self::Validate => "validate",
            Self::MeasureRegions => "measure-regions",
        })
    }
}

/// An angle in radians, written either as a number or as `"pi/16"`,
/// `"3*pi/8"`, `"pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Expr(String),
}

impl Angle {
    pub fn radians(&self) -> Result<f64, String> {
        match self {
            Self::Radians(v) => Ok(*v),
            Self::Expr(s) => parse_pi_expr(s).ok_or_else(|| format!("cannot parse angle {s:?}")),
        }
    }
}

fn parse_pi_expr(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let factor = match num.as_str() {
        "pi" => 1.0,
        n => n.strip_suffix("*pi")?.parse::<f64>().ok()?,
    };
    Some(factor * PI / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    #[default]
    Slit,
    Circular,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallName {
    #[default]
    Floor,
    Ceiling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default)]
    pub shape: ShapeName,
    pub depth: f64,
    /// Slit width, circle diameter or square side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Full wedge angle of a slit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Angle>,
    /// Cone half-angle of a circular hole.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Angle>,
    /// Solid angle of a circular or square hole.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solid_angle: Option<f64>,
    #[serde(default)]
    pub wall: WallName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dimension: u8,
    /// Fixed height; required unless the grid sweeps the height.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breadth: Option<f64>,
    pub holes: Vec<HoleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub k_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    pub eta: f64,
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    #[default]
    SemiAnalytic,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkModeName {
    #[default]
    Approx,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Zero disables the Monte Carlo columns.
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reflections")]
    pub reflections: Vec<u32>,
    #[serde(default)]
    pub estimator: EstimatorName,
    #[serde(default)]
    pub link_mode: LinkModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    /// Uniform samples per row for `measure-regions`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

fn default_trials() -> u64 {
    2000
}

fn default_reflections() -> Vec<u32> {
    vec![2]
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            seed: 0,
            reflections: default_reflections(),
            estimator: EstimatorName::default(),
            link_mode: LinkModeName::default(),
            nodes: None,
            density: None,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Label used in the CSV and for output file names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// CSV path; relative paths resolve against `--out`. Defaults to
    /// `<name>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub domain: DomainConfig,
    pub channel: ChannelConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub sim: SimSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| {
                let start = text[..s.start].rfind('\n').map_or(0, |i| i + 1);
                text[start..]
                    .lines()
                    .next()
                    .unwrap_or("")
                    .trim()
                    .to_string()
            });
            err(
                field.unwrap_or_else(|| "<document>".into()),
                e.message().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LoadError::Io(path.display().to_string(), e.to_string()))?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    /// Checks every field against the library invariants without running.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid_points()?;
        let heights: Vec<f64> = if self.sweeps_height() {
            grid.clone()
        } else {
            vec![self
                .domain
                .height
                .ok_or_else(|| err("domain.height", "required for sweep-density"))?]
        };
        for h in heights {
            self.domain_at(h)?;
        }
        if self.channel.alpha.is_empty() {
            return Err(err("channel.alpha", "list must not be empty"));
        }
        for &a in &self.channel.alpha {
            self.channel_params(a)?;
        }
        if self.sim.reflections.is_empty() {
            return Err(err("sim.reflections", "list must not be empty"));
        }
        if self.sim.reflections.iter().any(|&c| c > 8) {
            return Err(err("sim.reflections", "orders above 8 are not supported"));
        }
        match self.kind {
            ExperimentKind::SweepH | ExperimentKind::Validate if self.domain.dimension == 2 => {}
            ExperimentKind::SweepH => {
                return Err(err("domain.dimension", "sweep-h needs a 2D domain"))
            }
            ExperimentKind::Sweep3d if self.domain.dimension != 3 => {
                return Err(err("domain.dimension", "sweep-3d needs a 3D domain"))
            }
            ExperimentKind::SweepDensity => {
                if grid.iter().any(|&r| r < 0.0) {
                    return Err(err("grid", "densities must be >= 0"));
                }
                if self.sim.nodes.is_some() || self.sim.density.is_some() {
                    return Err(err(
                        "sim",
                        "nodes/density come from the grid in sweep-density",
                    ));
                }
            }
            _ => {}
        }
        if self.domain.holes.len() != 1 && self.kind != ExperimentKind::SweepDensity {
            return Err(err(
                "domain.holes",
                format!("{} needs exactly one hole", self.kind),
            ));
        }
        if self.kind == ExperimentKind::MeasureRegions {
            if self.sim.samples.is_none() && self.sim.trials > 0 {
                return Err(err("sim.samples", "required for measure-regions"));
            }
        } else if self.sim.trials > 0 && self.kind != ExperimentKind::SweepDensity {
            match (self.sim.nodes, self.sim.density) {
                (Some(_), Some(_)) => {
                    return Err(err("sim", "give either nodes or density, not both"))
                }
                (None, None) => return Err(err("sim.nodes", "nodes or density is required")),
                (_, Some(d)) if !(d >= 0.0) || !d.is_finite() => {
                    return Err(err("sim.density", "must be finite and >= 0"))
                }
                _ => {}
            }
        }
        if self.kind == ExperimentKind::Validate && self.sim.trials == 0 {
            return Err(err("sim.trials", "validate needs Monte Carlo trials"));
        }
        Ok(())
    }

    pub fn sweeps_height(&self) -> bool {
        self.kind != ExperimentKind::SweepDensity
    }

    pub fn max_reflections(&self) -> u32 {
        self.sim.reflections.iter().copied().max().unwrap_or(0)
    }

    pub fn grid_points(&self) -> Result<Vec<f64>, ConfigError> {
        let g = &self.grid;
        if g.steps == 0 {
            return Err(err("grid.steps", "grid must have at least one point"));
        }
        if !g.start.is_finite() || !g.stop.is_finite() {
            return Err(err("grid", "start and stop must be finite"));
        }
        if g.steps == 1 {
            return Ok(vec![g.start]);
        }
        let n = (g.steps - 1) as f64;
        match g.spacing {
            Spacing::Linear => Ok((0..g.steps)
                .map(|i| g.start + (g.stop - g.start) * i as f64 / n)
                .collect()),
            Spacing::Log => {
                if !(g.start > 0.0 && g.stop > 0.0) {
                    return Err(err(
                        "grid.spacing",
                        "log spacing needs positive start and stop",
                    ));
                }
                let (a, b) = (g.start.ln(), g.stop.ln());
                Ok((0..g.steps)
                    .map(|i| (a + (b - a) * i as f64 / n).exp())
                    .collect())
            }
        }
    }

    pub fn channel_params(&self, alpha: f64) -> Result<ChannelParams, ConfigError> {
        let c = &self.channel;
        let params = match (c.beta, c.r0) {
            (Some(beta), None) => ChannelParams::new(c.k_factor, beta, c.eta, alpha),
            (None, Some(r0)) => ChannelParams::with_range(c.k_factor, r0, c.eta, alpha),
            _ => return Err(err("channel.beta", "give exactly one of beta and r0")),
        }
        .map_err(|e| err("channel", e.to_string()))?;
        match c.omega {
            Some(w) => params
                .with_omega(w)
                .map_err(|e| err("channel.omega", e.to_string())),
            None => Ok(params),
        }
    }

    fn hole(&self, i: usize, h: &HoleConfig) -> Result<KeyholeSpec, ConfigError> {
        let field = |f: &str| format!("domain.holes[{i}].{f}");
        let three = self.domain.dimension == 3;
        let given = [
            h.width.is_some(),
            h.phi.is_some(),
            h.psi.is_some(),
            h.solid_angle.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(err(
                field("width"),
                "give exactly one of width, phi, psi, solid_angle",
            ));
        }
        let angle = |a: &Angle, f: &str| a.radians().map_err(|m| err(field(f), m));
        let center = [h.x, h.y.unwrap_or(0.0)];
        if three && h.y.is_none() {
            return Err(err(field("y"), "required in 3D"));
        }
        let spec = match (h.shape, three) {
            (ShapeName::Slit, false) => match (&h.width, &h.phi) {
                (Some(w), _) => KeyholeSpec::slit(h.x, *w, h.depth),
                (_, Some(phi)) => KeyholeSpec::slit_with_angle(h.x, angle(phi, "phi")?, h.depth),
                _ => return Err(err(field("phi"), "a slit takes width or phi")),
            },
            (ShapeName::Circular, true) => match (&h.width, &h.psi, h.solid_angle) {
                (Some(w), _, _) => KeyholeSpec::circular(center, *w, h.depth),
                (_, Some(psi), _) => {
                    KeyholeSpec::circular_with_angle(center, angle(psi, "psi")?, h.depth)
                }
                (_, _, Some(sa)) => {
                    let cos = 1.0 - sa / (2.0 * PI);
                    if !(-1.0..1.0).contains(&cos) {
                        return Err(err(field("solid_angle"), "must lie in (0, 2π)"));
                    }
                    KeyholeSpec::circular_with_angle(center, cos.acos(), h.depth)
                }
                _ => {
                    return Err(err(
                        field("psi"),
                        "a circular hole takes width, psi or solid_angle",
                    ))
                }
            },
            (ShapeName::Square, true) => match (&h.width, h.solid_angle) {
                (Some(w), _) => KeyholeSpec::square(center, *w, h.depth),
                (_, Some(sa)) => KeyholeSpec::square_with_solid_angle(center, sa, h.depth),
                _ => {
                    return Err(err(
                        field("width"),
                        "a square hole takes width or solid_angle",
                    ))
                }
            },
            (shape, _) => {
                return Err(err(
                    field("shape"),
                    format!(
                        "{shape:?} holes need a {}D domain",
                        if three { 2 } else { 3 }
                    ),
                ))
            }
        }
        .map_err(|e| err(field("width"), e.to_string()))?;
        Ok(spec.on_wall(match h.wall {
            WallName::Floor => Wall::Floor,
            WallName::Ceiling => Wall::Ceiling,
        }))
    }

    /// The domain with height `h`.
    pub fn domain_at(&self, h: f64) -> Result<KeyholeDomain, ConfigError> {
        let d = &self.domain;
        let holes = d
            .holes
            .iter()
            .enumerate()
            .map(|(i, hc)| self.hole(i, hc))
            .collect::<Result<Vec<_>, _>>()?;
        match d.dimension {
            2 => KeyholeDomain::planar(h, d.length, holes),
            3 => KeyholeDomain::cuboid(
                h,
                d.length,
                d.breadth
                    .ok_or_else(|| err("domain.breadth", "required in 3D"))?,
                holes,
            ),
            other => {
                return Err(err(
                    "domain.dimension",
                    format!("must be 2 or 3, got {other}"),
                ))
            }
        }
        .map_err(|e| err("domain", e.to_string()))
    }

    /// Monte Carlo settings for one row.
    pub fn sim_config(
        &self,
        nodes: NodeCount,
        max_c: u32,
        seed: u64,
        threads: Option<usize>,
    ) -> SimConfig {
        let mut sim = SimConfig::new(nodes, self.sim.trials, seed);
        sim.max_reflections = max_c;
        sim.threads = threads;
        sim.estimator = match self.sim.estimator {
            EstimatorName::SemiAnalytic => Estimator::SemiAnalytic,
            EstimatorName::Bernoulli => Estimator::Bernoulli,
        };
        sim.link_mode = match self.sim.link_mode {
            LinkModeName::Approx => LinkMode::Approx,
            LinkModeName::Exact => LinkMode::Exact,
        };
        sim
    }

    pub fn node_count(&self) -> NodeCount {
        match (self.sim.nodes, self.sim.density) {
            (Some(n), _) => NodeCount::Fixed(n),
            (_, Some(d)) => NodeCount::Density(d),
            _ => NodeCount::Fixed(0),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
