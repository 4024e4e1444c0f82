//! Error and diagnostic types used across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A structured validation finding: where, and what failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Human-readable location, e.g. `rule 3` or `row 2, position 17`.
    pub at: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.at, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed with {} finding(s):{}", .0.len(),
            .0.iter().map(|d| format!("\n  - {d}")).collect::<String>())]
    Validation(Vec<Diagnostic>),

    #[error("no expanding eigenvalue found: {0}")]
    NoExpansion(String),

    #[error("{what} exceeded cap {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("symbol enumeration did not stabilize after {refinements} refinements (last grid {grid}); an LP-feasibility pass may still certify individual symbols")]
    NotStabilized { refinements: usize, grid: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("pasting failed: {0}")]
    Paste(String),

    #[error("reference out of patch: {0}")]
    OutOfPatch(String),

    #[error("bad input: {0}")]
    BadInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn bad_input(msg: impl Into<String>) -> Self {
        Error::BadInput(msg.into())
    }
}
