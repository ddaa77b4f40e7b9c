//! Experiment orchestration for the `lqec` binary: config ingestion, batch
//! runs, analysis bundles, and preset study pipelines.

pub mod commands;
pub mod config;
pub mod figures;

use lqec_core::Error;

/// Documented process exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParam(_)
        | Error::InvalidCircuit(_)
        | Error::Parse(_)
        | Error::ShapeMismatch(_) => 2,
        Error::Io(_) => 3,
        Error::Provenance(_) => 4,
        Error::NonConvergence(_) => 5,
    }
}

/// Default output root: `LQEC_OUTPUT_DIR` or `./out`.
pub fn default_out_root() -> std::path::PathBuf {
    std::env::var_os("LQEC_OUTPUT_DIR")
        .map(Into::into)
        .unwrap_or_else(|| "out".into())
}
