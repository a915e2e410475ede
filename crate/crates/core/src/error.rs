//! Error type shared across the simulation library.

use std::fmt;

/// Errors produced by configuration validation and the simulation engine.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Invalid or inconsistent configuration (bad parameter, incompatible
    /// setting/estimator/adversary pairing, dimension conflicts).
    Config(String),
    /// An operation was called outside its mathematical domain.
    Domain {
        /// Operation that rejected the input.
        op: &'static str,
        detail: String,
    },
    /// Two collections that must agree in length do not.
    DimensionMismatch { expected: usize, got: usize },
    /// Exhaustive enumeration was requested for an instance too large to
    /// enumerate.
    InstanceTooLarge(String),
    /// A stated precondition (e.g. the exponential-weights inequality
    /// hypothesis) was violated by the inputs.
    HypothesisFailed(String),
    /// The operation does not apply to this variant.
    NotApplicable(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "configuration error: {msg}"),
            Self::Domain { op, detail } => write!(f, "domain error in {op}: {detail}"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::InstanceTooLarge(msg) => write!(f, "instance too large: {msg}"),
            Self::HypothesisFailed(msg) => write!(f, "hypothesis failed: {msg}"),
            Self::NotApplicable(what) => write!(f, "not applicable: {what}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
