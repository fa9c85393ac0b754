//! Numerical toolkit for weighted Lorentz-space functionals on (0, ∞).
//!
//! The crate evaluates the norm functionals built from the decreasing
//! rearrangement f* and the maximal function f** = S f* (S the Hardy
//! averaging operator), certifies the weight classes tied to boundedness of
//! S on decreasing functions (the B_p tail condition and the R_p
//! quasi-decreasing-primitive condition), constructs the derived weight w_q
//! whose two-part functional reproduces W^q, and checks the equivalent-norm
//! and embedding conditions between the Λ and Γ scales. A gallery of named
//! scenarios pins down the concrete examples and dichotomies the library is
//! built to exhibit, and a CLI exposes everything with JSON reports.
//!
//! All values are immutable after construction and every operation is pure
//! given its configuration, so grid evaluation can be parallelized by the
//! caller; nothing here holds shared mutable state.

pub mod classes;
pub mod cli;
pub mod config;
pub mod constructions;
pub mod embeddings;
pub mod gallery;
pub mod norms;
pub mod operators;
pub mod quad;
pub mod realfun;
pub mod sampling;
pub mod weights;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("unknown scenario: {0}")]
    UnknownScenario(String),
    #[error("spec parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Report schema tag embedded in every machine-readable report.
pub const REPORT_SCHEMA: &str = "lorentz-lab/1";

/// Artifact version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
