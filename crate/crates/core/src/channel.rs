//! Rician random-connection model.
//!
//! A pair at unfolded distance `r` (in wavelengths) whose dominant path has
//! bounced `c` times off walls with attenuation `α` connects with probability
//!
//! ```text
//! H^(c)(r) = Q_1( √(2K), √(2(K+1) β r^η α^{-c}) )
//! ```
//!
//! where `β = 1/r0^η`. The approximated form replaces `Q_1` by
//! `exp(-e^{ν(a)} b^{μ(a)})`, which collapses to `exp(-λ_c r^κ)`.
//!
//! Transmit/receive gains, SNR, rate threshold and the outage formulation
//! are all folded into `β`; antennas are isotropic.

use crate::specfun::{approx_mu, approx_nu, bessel_i_scaled, marcum_q1};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid channel parameter `{field}`: {reason} (got {value})")]
    Invalid {
        field: &'static str,
        reason: &'static str,
        value: f64,
    },
}

fn invalid(field: &'static str, reason: &'static str, value: f64) -> ChannelError {
    ChannelError::Invalid {
        field,
        reason,
        value,
    }
}

/// Validated radio/channel constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    k_factor: f64,
    omega: f64,
    beta: f64,
    eta: f64,
    alpha: f64,
}

impl ChannelParams {
    /// `k_factor` = Rice factor K, `beta` = 1/r0^η, `eta` = path-loss
    /// exponent, `alpha` = per-reflection power attenuation.
    pub fn new(k_factor: f64, beta: f64, eta: f64, alpha: f64) -> Result<Self, ChannelError> {
        let p = Self {
            k_factor,
            omega: 1.0,
            beta,
            eta,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`ChannelParams::new`] but parameterized by the typical
    /// connection range `r0`, so that `β · r0^η = 1`.
    pub fn with_range(k_factor: f64, r0: f64, eta: f64, alpha: f64) -> Result<Self, ChannelError> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(invalid("r0", "must be finite and > 0", r0));
        }
        Self::new(k_factor, r0.powf(-eta), eta, alpha)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self, ChannelError> {
        Self::new(self.k_factor, self.beta, self.eta, alpha).and_then(|p| p.with_omega(self.omega))
    }

    /// Rician scale ω. Only the gain density uses it; the connection
    /// probability already absorbs scale into β.
    pub fn with_omega(mut self, omega: f64) -> Result<Self, ChannelError> {
        self.omega = omega;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), ChannelError> {
        if !(self.k_factor >= 0.0) || !self.k_factor.is_finite() {
            return Err(invalid(
                "k_factor",
                "must be finite and >= 0",
                self.k_factor,
            ));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(invalid("omega", "must be finite and > 0", self.omega));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be finite and > 0", self.beta));
        }
        if !(self.eta >= 2.0) || !self.eta.is_finite() {
            return Err(invalid("eta", "must be finite and >= 2", self.eta));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", "must lie in [0, 1]", self.alpha));
        }
        Ok(())
    }

    pub fn k_factor(&self) -> f64 {
        self.k_factor
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Typical connection range `r0 = β^{-1/η}`.
    pub fn r0(&self) -> f64 {
        self.beta.powf(-1.0 / self.eta)
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants::new(self)
    }
}

/// Constants of the approximated link function `exp(-λ_c r^κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Marcum first argument `a = √(2K)`.
    pub a: f64,
    pub mu_a: f64,
    pub nu_a: f64,
    /// `κ = μ(a) η / 2`.
    pub kappa: f64,
    k_factor: f64,
    beta: f64,
    alpha: f64,
}

impl DerivedConstants {
    pub fn new(p: &ChannelParams) -> Self {
        let a = (2.0 * p.k_factor).sqrt();
        let mu_a = approx_mu(a);
        let nu_a = approx_nu(a);
        Self {
            a,
            mu_a,
            nu_a,
            kappa: mu_a * p.eta / 2.0,
            k_factor: p.k_factor,
            beta: p.beta,
            alpha: p.alpha,
        }
    }

    /// `λ_c = e^{ν(a)} (2(K+1) β α^{-c})^{μ(a)/2}`; infinite when `α = 0`
    /// and `c ≥ 1`.
    pub fn lambda(&self, c: u32) -> f64 {
        let atten = self.alpha.powi(-(c as i32));
        self.nu_a.exp() * (2.0 * (self.k_factor + 1.0) * self.beta * atten).powf(self.mu_a / 2.0)
    }

    /// `λ_c` for `c = 0..=max_c`.
    pub fn lambdas(&self, max_c: u32) -> Vec<f64> {
        (0..=max_c).map(|c| self.lambda(c)).collect()
    }
}

/// Which form of the link function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkMode {
    /// Marcum Q evaluated by its Bessel series.
    Exact,
    /// `exp(-λ_c r^κ)`.
    #[default]
    Approx,
}

/// Channel gain density `f_X(x)` of a Rician channel with Rice factor K and
/// scale ω.
pub fn rician_pdf(x: f64, params: &ChannelParams) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = params.k_factor;
    let w = params.omega;
    let z = (4.0 * k * (k + 1.0) * x / w).sqrt();
    // I_0(z) = e^z ĩ_0(z) keeps the product finite for large x.
    (k + 1.0) / w * (-(k + (k + 1.0) * x / w) + z).exp() * bessel_i_scaled(0, z)
}

/// Pair connection probability `H^(c)(r)`.
pub fn connection_prob(r: f64, c: u32, params: &ChannelParams, mode: LinkMode) -> f64 {
    ConnectionModel::new(*params, mode).prob(r, c)
}

/// Link function with its derived constants precomputed; the hot path of
/// the Monte Carlo engine.
#[derive(Debug, Clone)]
pub struct ConnectionModel {
    params: ChannelParams,
    derived: DerivedConstants,
    mode: LinkMode,
    lambdas: Vec<f64>,
}

impl ConnectionModel {
    pub fn new(params: ChannelParams, mode: LinkMode) -> Self {
        let derived = params.derived();
        Self {
            params,
            derived,
            mode,
            lambdas: derived.lambdas(8),
        }
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }
    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }
    pub fn mode(&self) -> LinkMode {
        self.mode
    }

    pub fn prob(&self, r: f64, c: u32) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        match self.mode {
            LinkMode::Approx => {
                let lambda = match self.lambdas.get(c as usize) {
                    Some(&l) => l,
                    None => self.derived.lambda(c),
                };
                (-lambda * r.powf(self.derived.kappa)).exp()
            }
            LinkMode::Exact => {
                let p = &self.params;
                let atten = p.alpha.powi(-(c as i32));
                let b = (2.0 * (p.k_factor + 1.0) * p.beta * r.powf(p.eta) * atten).sqrt();
                marcum_q1(self.derived.a, b)
            }
        }
    }
}
