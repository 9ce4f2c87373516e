//! Error taxonomy shared across the crate.
//!
//! Configuration problems and degenerate geometry are recoverable (`Result`);
//! violations of internal call contracts (index out of range, mismatched
//! vector lengths) panic via assertions instead of surfacing here.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration input. The message names the
    /// offending key or value.
    #[error("config error: {0}")]
    Config(String),

    /// Geometry that leaves a quantity undefined, e.g. a point exactly on
    /// the panel plane, or a source coincident with an element.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// An exhaustive search whose candidate set exceeds the safety cap.
    #[error("search space too large: {0}")]
    TooLarge(String),

    /// A self-check that did not hold; carried by the `validate` runner.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Underlying I/O failure while reading config or writing reports.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
