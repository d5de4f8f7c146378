//! Crate-wide error type.

use thiserror::Error;

/// Errors shared across the numerical subsystems.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs fail a domain precondition (dimension mismatch, index out
    /// of range, nonpositive eigenvalue where positivity is required).
    #[error("domain error: {0}")]
    Domain(String),

    /// A spectrum lies outside the declared validity region of an
    /// operator (eigenvalue floor, trace sublevel set).
    #[error("region error: {0}")]
    Region(String),

    /// A metric field lost positive definiteness at a grid node.
    #[error("degenerate metric at node {node:?}: {detail}")]
    DegenerateMetric { node: Vec<usize>, detail: String },

    /// A numerical routine failed (conditioning, stagnation) with
    /// diagnostics attached.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Newton iteration stagnated before reaching the residual target.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// Input/serialization failure.
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn region(msg: impl Into<String>) -> Self {
        Error::Region(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
