//! Standard-library companion to `hflab-core`: JSON inputs and reports, CSV
//! outputs, the binary integral dump, a parallel survey driver and the
//! command implementations behind the `hflab` binary.

pub mod commands;
pub mod dump;
pub mod input;
pub mod parallel;
pub mod report;
pub mod tables;

pub use hflab_core;

/// Malformed or invalid input documents.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Invalid(#[from] hflab_core::Error),
}
