#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod specfun;

#[cfg(test)]
mod test_support;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
