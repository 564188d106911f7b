//! Verification runner for `hkorbit-core`: randomised suites, metric
//! evaluation at given points and sweeps over the matrix size.

pub mod config;
pub mod convergence;
pub mod io;
pub mod metric;
pub mod report;
pub mod suites;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hkorbit_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
