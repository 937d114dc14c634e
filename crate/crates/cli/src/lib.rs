//! Batch front-end for `cylris`: TOML configs, synthesis pipelines, sweeps
//! and CSV/JSON export.

pub mod app;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod validate;

pub use error::CliError;
