//! Library side of the `nadmm` command: config loading, CSV traces, and the
//! `run`, `gallery` and `diagnose` commands.

pub mod commands;
pub mod config;
pub mod trace_csv;

pub use commands::{
    cmd_diagnose, cmd_gallery, cmd_run, seed_from_env, DiagnoseConstants, DiagnoseOptions,
    DiagnoseOutcome, RunOutcome, RunSummary,
};
pub use config::{OrderPolicy, OutputConfig, Prepared, ProblemConfig, RunConfig, StopOverrides};
pub use trace_csv::{read_trace, write_trace, write_trace_file};

use nadmm::apps::AppError;
use nadmm::diagnostics::DiagnosticsError;
use nadmm::gallery::GalleryError;
use nadmm::prox::ProxError;
use nadmm::EngineError;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("trace format error: {0}")]
    Csv(String),
    #[error("{}: trace has no iterations", .0.display())]
    EmptyTrace(PathBuf),
    #[error("NADMM_SEED must be an unsigned integer, got '{0}'")]
    InvalidSeed(String),
    #[error("json: {0}")]
    Json(String),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// The run did not converge, or a diagnostic check failed.
pub const EXIT_NOT_CONVERGED: i32 = 2;
