//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration violates the admissibility hypotheses (positivity,
    /// exponent ranges, strip containment) or refers to unknown registry keys.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Failure while reading or parsing a config file.
    #[error("config parse error: {0}")]
    Parse(String),

    /// Requested mesh resolution cannot resolve the epsilon-scale oscillation.
    #[error("mesh resolution error: {0}")]
    MeshResolution(String),

    /// A point lies outside the mesh hull beyond the snapping tolerance.
    #[error("point ({0}, {1}) not found in mesh")]
    PointNotFound(f64, f64),

    /// Rough-mesh operation invoked on a mesh without tagged strip elements.
    #[error("mesh has no tagged strip elements")]
    MissingStripTags,

    /// Two fields that must live on the same mesh do not.
    #[error("field/mesh mismatch: {0}")]
    MeshMismatch(String),

    /// Pivot breakdown in the direct factorization.
    #[error("linear solver breakdown: {0}")]
    LinearBreakdown(String),

    /// Nonlinear iteration failed to reach tolerance (best iterate retained
    /// by the caller's diagnostics).
    #[error("nonlinear solver did not converge: {0}")]
    NonConvergence(String),

    /// Degenerate input rejected by a verification routine.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
