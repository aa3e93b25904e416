//! Measures of the regions `D_c`.

use rand::Rng;
use rayon::prelude::*;

use super::unfold::classify_unchecked;
use super::{los_angle, Dimension, GeometryError, KeyholeDomain, KeyholeSpec, LosAngle, Point};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionMethod {
    /// Small-angle estimates: `|D_0| = φh²/2`, `|D_c| = 2|D_0|` in 2D;
    /// `|D_0| = φ_sol h³/3`, `|D_c| = 6c|D_0|` in 3D.
    AnalyticApprox,
    /// Hit counting with [`super::classify_path`] on uniform samples.
    MonteCarlo { samples: u64, seed: u64 },
}

/// Area (2D) or volume (3D) with its standard error (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMeasure {
    pub value: f64,
    pub std_error: f64,
}

const BATCH: u64 = 1 << 16;

pub fn region_measure(
    c: u32,
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    method: RegionMethod,
) -> Result<RegionMeasure, GeometryError> {
    match method {
        RegionMethod::AnalyticApprox => {
            let h = domain.height();
            let value = match los_angle(hole, domain.dimension())? {
                LosAngle::Planar { phi } => {
                    let d0 = 0.5 * phi * h * h;
                    if c == 0 {
                        d0
                    } else {
                        2.0 * d0
                    }
                }
                LosAngle::Solid { solid_angle, .. } => {
                    let d0 = solid_angle * h.powi(3) / 3.0;
                    if c == 0 {
                        d0
                    } else {
                        6.0 * c as f64 * d0
                    }
                }
            };
            Ok(RegionMeasure {
                value,
                std_error: 0.0,
            })
        }
        RegionMethod::MonteCarlo { samples, seed } => {
            Ok(region_measures_monte_carlo(c, domain, hole, samples, seed)?[c as usize])
        }
    }
}

/// Monte Carlo measures of `D_0, …, D_{max_c}` from one shared sample.
///
/// Samples are drawn from the part of the domain that can see the hole
/// within `max_c` reflections: a box around the hole axis of transverse
/// half-extent `(max_c + 1) h tan(half-angle)`, clipped to the domain.
pub fn region_measures_monte_carlo(
    max_c: u32,
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    samples: u64,
    seed: u64,
) -> Result<Vec<RegionMeasure>, GeometryError> {
    los_angle(hole, domain.dimension())?;
    let n_orders = max_c as usize + 1;
    if samples == 0 {
        return Ok(vec![
            RegionMeasure {
                value: 0.0,
                std_error: 0.0
            };
            n_orders
        ]);
    }
    let h = domain.height();
    let reach = (max_c as f64 + 1.0) * h * hole.width() / (2.0 * hole.depth());
    let [cx, cy] = hole.center();
    let span = |center: f64, extent: f64| ((center - reach).max(0.0), (center + reach).min(extent));
    let (x0, x1) = span(cx, domain.length());
    let (y0, y1) = match domain.dimension() {
        Dimension::Two => (0.0, 0.0),
        Dimension::Three => span(cy, domain.breadth()),
    };
    let box_measure = (x1 - x0)
        * h
        * match domain.dimension() {
            Dimension::Two => 1.0,
            Dimension::Three => y1 - y0,
        };

    let batches = samples.div_ceil(BATCH);
    let counts: Vec<Vec<u64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let n = BATCH.min(samples - b * BATCH);
            let mut hits = vec![0u64; n_orders];
            for _ in 0..n {
                let p = Point {
                    x: rng.random_range(x0..=x1),
                    y: if y1 > y0 {
                        rng.random_range(y0..=y1)
                    } else {
                        0.0
                    },
                    z: rng.random_range(0.0..=h),
                };
                if let Some(pc) = classify_unchecked(&p, domain, hole, max_c) {
                    hits[pc.reflections as usize] += 1;
                }
            }
            hits
        })
        .collect();

    let n = samples as f64;
    Ok((0..n_orders)
        .map(|c| {
            let k: u64 = counts.iter().map(|v| v[c]).sum();
            let p = k as f64 / n;
            RegionMeasure {
                value: box_measure * p,
                std_error: box_measure * (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect())
}

/// Exact measure of `D_c` for a slit in an unbounded strip, used as a
/// reference: `t h²` for `c = 0`, `2 t h²` for `c ≥ 1`, `t = tan(φ/2)`.
#[cfg(test)]
fn exact_planar(c: u32, h: f64, t: f64) -> f64 {
    if c == 0 {
        t * h * h
    } else {
        2.0 * t * h * h
    }
}
