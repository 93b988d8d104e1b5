//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by lattice, transform, comb, restriction, and recovery
/// operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values that must live on the same grid do not.
    #[error("grid mismatch: expected Z_{expected_n}^{expected_d}, got Z_{got_n}^{got_d}")]
    GridMismatch {
        expected_n: usize,
        expected_d: usize,
        got_n: usize,
        got_d: usize,
    },

    /// A coordinate tuple has the wrong number of entries for its grid.
    #[error("dimension error: expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Grid construction rejected the requested size.
    #[error("grid size error: {0}")]
    GridSize(String),

    /// A configured cap on an exhaustive computation was exceeded.
    #[error("{what} needs {needed} candidates, exceeding the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// Comb parts were not pairwise disjoint.
    #[error("comb parts overlap at point index {index}")]
    OverlappingParts { index: usize },

    /// A part coefficient is not a member of the supplied coefficient set.
    #[error("coefficient {re}+{im}i is not a member of the coefficient set")]
    CoefficientNotInSet { re: f64, im: f64 },

    /// An operation that needs a nonzero comb received the zero comb.
    #[error("the zero comb has no effective support")]
    ZeroComb,

    /// Erasing every frequency leaves nothing to recover from.
    #[error("erasure set covers the whole grid; at least one frequency must survive")]
    TotalErasure,

    /// A non-finite value (NaN or infinity) appeared where one is not allowed.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An empty set was supplied where a nonempty one is required.
    #[error("empty set: {0}")]
    EmptySet(&'static str),

    /// Malformed JSON input or a schema violation.
    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
