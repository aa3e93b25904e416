//! Closed-form and quadrature connectivity of external keyhole nodes.
//!
//! All integrals use the approximated link function `exp(-λ_c r^κ)` and the
//! sector approximation of the regions `D_c`. Contributions are
//! unnormalized (`∫_{D_c} H^(c)`); divide by the domain measure for the
//! pair average `⟨H_ki⟩`.
//!
//! Mean degree convention: `μ_k = ρ · Σ_c ∫_{D_c} H^(c) = N ⟨H_ki⟩`.

mod integrals;

pub use integrals::{
    cutoff_angle, h_max, los_integral_2d, los_integral_3d, reflection_integral_2d,
    reflection_integral_2d_with, reflection_integral_3d, reflection_integral_3d_with,
    reflection_upper_bound_2d, reflection_upper_bound_3d, REFLECTION_TOL,
};

use crate::channel::ChannelParams;
use crate::geometry::{
    los_angle, DomainWarning, GeometryError, KeyholeDomain, KeyholeSpec, LosAngle,
};
use crate::quadrature::QuadratureResult;
use crate::specfun::SpecialError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("reflection order {c}: quadrature missed tolerance {requested:e} (estimate {} ± {})", partial.value, partial.abs_error)]
    Quadrature {
        c: u32,
        partial: QuadratureResult,
        requested: f64,
    },
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Per-order contributions to `V⟨H_ki⟩` for one external node.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionBreakdown {
    /// `∫_{D_c} H^(c)` for `c = 0..=C`.
    pub per_c: Vec<f64>,
    /// Quadrature error estimate per order (zero for closed forms).
    pub per_c_error: Vec<f64>,
    /// `V⟨H_ki⟩ = Σ_c per_c`.
    pub total_unnormalized: f64,
    /// `⟨H_ki⟩ = total / V`.
    pub normalized: f64,
}

impl ContributionBreakdown {
    /// Mean degree `μ_k = ρ V⟨H_ki⟩` at density `rho`.
    pub fn mean_degree(&self, rho: f64) -> f64 {
        rho * self.total_unnormalized
    }
}

/// `V⟨H_ki⟩` of `hole` summed over `c = 0..=max_c`.
pub fn expected_external_h(
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    params: &ChannelParams,
    max_c: u32,
) -> Result<ContributionBreakdown, AnalyticError> {
    let h = domain.height();
    let angle = los_angle(hole, domain.dimension())?;
    let mut per_c = Vec::with_capacity(max_c as usize + 1);
    let mut per_c_error = Vec::with_capacity(max_c as usize + 1);
    match angle {
        LosAngle::Planar { phi } => {
            per_c.push(los_integral_2d(params, h, phi)?);
            per_c_error.push(0.0);
            for c in 1..=max_c {
                let r = reflection_integral_2d(c, params, h, phi)?;
                per_c.push(r.value);
                per_c_error.push(r.abs_error);
            }
        }
        LosAngle::Solid { psi, .. } => {
            per_c.push(los_integral_3d(params, h, psi)?);
            per_c_error.push(0.0);
            for c in 1..=max_c {
                let r = reflection_integral_3d(c, params, h, psi)?;
                per_c.push(r.value);
                per_c_error.push(r.abs_error);
            }
        }
    }
    let total: f64 = per_c.iter().sum();
    Ok(ContributionBreakdown {
        per_c,
        per_c_error,
        total_unnormalized: total,
        normalized: total / domain.volume(),
    })
}

/// `1 − e^{−μ_k}`: probability that at least one interior node links to
/// the external node. NaN for negative `μ_k`.
pub fn external_connect_prob(mean_links: f64) -> f64 {
    if !(mean_links >= 0.0) {
        return f64::NAN;
    }
    -(-mean_links).exp_m1()
}

/// `Π_k (1 − e^{−μ_k})`.
pub fn multi_hole_connect_prob(mean_links: &[f64]) -> f64 {
    mean_links
        .iter()
        .map(|&m| external_connect_prob(m))
        .product()
}

/// Analytic all-externals-connected probability of a multi-hole domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHoleAnalysis {
    pub breakdowns: Vec<ContributionBreakdown>,
    pub mean_degrees: Vec<f64>,
    pub probability: f64,
    /// Overlapping views make the product formula unjustified.
    pub warnings: Vec<DomainWarning>,
}

pub fn multi_hole_analysis(
    domain: &KeyholeDomain,
    params: &ChannelParams,
    max_c: u32,
    rho: f64,
) -> Result<MultiHoleAnalysis, AnalyticError> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(AnalyticError::InvalidInput(format!(
            "density must be finite and >= 0, got {rho}"
        )));
    }
    let breakdowns = domain
        .holes()
        .iter()
        .map(|hole| expected_external_h(domain, hole, params, max_c))
        .collect::<Result<Vec<_>, _>>()?;
    let mean_degrees: Vec<f64> = breakdowns.iter().map(|b| b.mean_degree(rho)).collect();
    let warnings = domain
        .warnings()
        .into_iter()
        .filter(|w| matches!(w, DomainWarning::OverlappingViews { .. }))
        .collect();
    Ok(MultiHoleAnalysis {
        probability: multi_hole_connect_prob(&mean_degrees),
        breakdowns,
        mean_degrees,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference(alpha: f64) -> ChannelParams {
        ChannelParams::new(4.0, 1.0, 2.0, alpha).unwrap()
    }

    fn slit_domain(h: f64) -> (KeyholeDomain, KeyholeSpec) {
        let hole = KeyholeSpec::slit_with_angle(2.5, PI / 16.0, 0.2).unwrap();
        (KeyholeDomain::planar(h, 5.0, vec![hole]).unwrap(), hole)
    }

    #[test]
    fn los_only_breakdown() {
        let (d, hole) = slit_domain(0.5);
        let b = expected_external_h(&d, &hole, &reference(0.5), 0).unwrap();
        let LosAngle::Planar { phi } = los_angle(&hole, d.dimension()).unwrap() else {
            panic!()
        };
        assert_eq!(
            b.per_c,
            vec![los_integral_2d(&reference(0.5), 0.5, phi).unwrap()]
        );
        assert_eq!(b.total_unnormalized, b.per_c[0]);
        assert!((b.normalized - b.per_c[0] / 2.5).abs() < 1e-18);
    }

    #[test]
    fn totals_grow_with_reflections_attenuation_and_angle() {
        for i in 1..=30 {
            let h = i as f64 * 0.1;
            let (d, hole) = slit_domain(h);
            let wide = KeyholeSpec::slit_with_angle(2.5, PI / 8.0, 0.2).unwrap();
            let mut prev = 0.0;
            for c in 0..=3 {
                let t = expected_external_h(&d, &hole, &reference(0.5), c)
                    .unwrap()
                    .total_unnormalized;
                assert!(t >= prev);
                prev = t;
            }
            let lo = expected_external_h(&d, &hole, &reference(0.5), 2).unwrap();
            let hi = expected_external_h(&d, &hole, &reference(1.0), 2).unwrap();
            assert!(hi.total_unnormalized >= lo.total_unnormalized);
            let w = expected_external_h(&d, &wide, &reference(0.5), 2).unwrap();
            assert!(w.total_unnormalized >= lo.total_unnormalized);
            assert!(hi.normalized <= 1.0 && hi.per_c.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn three_dimensional_breakdown() {
        let cone = KeyholeSpec::circular_with_angle([1.0, 1.0], PI / 32.0, 0.2).unwrap();
        let d = KeyholeDomain::cuboid(0.5, 2.0, 2.0, vec![cone]).unwrap();
        let b = expected_external_h(&d, &cone, &reference(0.5), 2).unwrap();
        let psi = cone.half_angle();
        assert_eq!(
            b.per_c[0],
            los_integral_3d(&reference(0.5), 0.5, psi).unwrap()
        );
        assert_eq!(
            b.per_c[2],
            reflection_integral_3d(2, &reference(0.5), 0.5, psi)
                .unwrap()
                .value
        );
    }

    #[test]
    fn connect_probability_edges() {
        assert_eq!(external_connect_prob(0.0), 0.0);
        assert!((external_connect_prob(2f64.ln()) - 0.5).abs() < 1e-16);
        assert_eq!(external_connect_prob(f64::INFINITY), 1.0);
        assert!(external_connect_prob(-1.0).is_nan());
        assert!(external_connect_prob(800.0) <= 1.0);
    }

    #[test]
    fn product_formula() {
        let mu = 1.3;
        let five = multi_hole_connect_prob(&[mu; 5]);
        assert!((five - (1.0 - (-mu).exp()).powi(5)).abs() < 1e-15);
        assert_eq!(multi_hole_connect_prob(&[1.0, 0.0, 2.0]), 0.0);
        let mus = [0.4, 1.1, 2.7];
        let p = multi_hole_connect_prob(&mus);
        assert!(mus.iter().all(|&m| p <= external_connect_prob(m)));
    }

    #[test]
    fn multi_hole_passes_overlap_warnings_through() {
        let params = reference(1.0);
        let spread: Vec<_> = (0..5)
            .map(|i| KeyholeSpec::slit_with_angle(0.5 + i as f64, PI / 16.0, 0.2).unwrap())
            .collect();
        let d = KeyholeDomain::planar(0.3, 5.0, spread).unwrap();
        let a = multi_hole_analysis(&d, &params, 2, 300.0).unwrap();
        assert!(a.warnings.is_empty());
        let mu = a.mean_degrees[0];
        assert!((a.probability - external_connect_prob(mu).powi(5)).abs() < 1e-15);

        let packed: Vec<_> = (0..2)
            .map(|i| KeyholeSpec::slit_with_angle(1.0 + 0.01 * i as f64, PI / 16.0, 0.2).unwrap())
            .collect();
        let d = KeyholeDomain::planar(0.3, 5.0, packed).unwrap();
        assert_eq!(
            multi_hole_analysis(&d, &params, 2, 300.0)
                .unwrap()
                .warnings
                .len(),
            1
        );
        assert!(multi_hole_analysis(&d, &params, 2, -1.0).is_err());
    }
}
