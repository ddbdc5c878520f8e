//! Batch driver: TOML-configured sweeps of the quantum metric, comparisons
//! against closed forms, and convergence studies.

pub mod config;
pub mod convergence;
pub mod error;
pub mod model;
pub mod sweep;

pub use config::RunConfig;
pub use convergence::{run_convergence, ConvergenceReport};
pub use error::{CliError, Result};
pub use sweep::{compute_rows, parse_csv, rows_to_csv, run_sweep, SweepRow, CSV_HEADER};
