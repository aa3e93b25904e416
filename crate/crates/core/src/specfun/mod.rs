//! Special functions: modified Bessel `I_ν`, incomplete gamma, and the
//! Marcum Q-function with its exponential approximation.
//!
//! All functions are pure and thread-safe.

mod bessel;
mod gamma;
mod marcum;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_i_scaled_sequence, BESSEL_OVERFLOW_X};
pub use gamma::{
    gamma, incomplete_gamma_diff, ln_gamma, lower_incomplete_gamma, lower_incomplete_gamma_with,
    upper_incomplete_gamma,
};
pub use marcum::{
    approx_mu, approx_nu, marcum_q1, marcum_q1_approx, marcum_q1_with, MU_COEFFS, NU_COEFFS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("{what} (got {value})")]
    Domain { what: &'static str, value: f64 },
    #[error("{what} overflows f64 at x = {value}; use the scaled form")]
    Overflow { what: &'static str, value: f64 },
    #[error("{what} did not converge within {terms} terms")]
    NoConvergence { what: &'static str, terms: usize },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),
}

/// Series truncation control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self, SpecialError> {
        if !(abs_tol > 0.0) {
            return Err(SpecialError::InvalidTolerance("abs_tol must be > 0"));
        }
        if max_terms == 0 {
            return Err(SpecialError::InvalidTolerance("max_terms must be >= 1"));
        }
        Ok(Self { abs_tol, max_terms })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_terms: 100_000,
        }
    }
}
