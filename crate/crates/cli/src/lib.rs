//! Runs, sweeps and operator diagnostics behind the `noether-ibvp` binary.

pub mod artifacts;
pub mod config;
pub mod diag;
pub mod error;
pub mod run;
pub mod sweep;

pub use config::Config;
pub use error::CliError;
