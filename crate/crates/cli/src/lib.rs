//! Experiment runner for keyhole connectivity sweeps: TOML configs in,
//! results CSV and run manifest out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diff;
pub mod output;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use diff::{diff_results, DiffError, DiffReport};
pub use run::{run, RunError, RunOptions, SweepResult};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// `validate` rows that disagree, or a non-empty diff.
    pub const MISMATCH: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
}
