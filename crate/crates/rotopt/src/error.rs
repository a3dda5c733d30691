use thiserror::Error;

/// Errors shared by all modules of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Spec validation failed; every detected violation is listed.
    #[error("invalid subshift spec: {}", .issues.join("; "))]
    InvalidSpec { issues: Vec<String> },

    /// A word key is not allowed under the spec transitions or has the wrong length.
    #[error("word '{word}' is not an allowed {len}-word for this spec")]
    WordNotAllowed { word: String, len: usize },

    /// Vector values with inconsistent dimensions.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Two locally constant functions were combined but belong to different specs.
    #[error("functions are defined over different subshift specs")]
    SpecMismatch,

    /// Pruning the higher-block graph removed every vertex.
    #[error("transition graph has no directed cycle; no invariant measure exists")]
    NoCycle,

    /// The pruned higher-block graph is not strongly connected.
    #[error("recurrent part of the transition graph is not strongly connected")]
    NotTransitive,

    /// Simple-cycle enumeration hit its cap.
    #[error("simple-cycle enumeration exceeded cap {cap} (found {found} so far)")]
    CycleCapExceeded { found: usize, cap: usize },

    /// A cycle refers to an edge id outside the graph or breaks the chaining rule.
    #[error("edge sequence does not form a closed walk in this graph: {detail}")]
    MalformedCycle { detail: String },

    /// A claimed stationary edge measure violates its invariants.
    #[error("stationary measure invariant violated: {detail}")]
    MeasureInvariant { detail: String },

    /// The queried rotation vector lies outside the rotation set.
    #[error("rotation vector is infeasible (outside the rotation set)")]
    InfeasibleH,

    /// The dual route requires a strictly interior rotation vector.
    #[error("rotation vector is not certified interior; use the primal route")]
    NotInterior,

    /// Cutting-plane minimization ran out of iterations; best bound attached.
    #[error("dual minimization hit the iteration cap; best value {best}")]
    MaxIters { best: f64 },

    /// Exact rotation-set mode is only available in dimension <= 2.
    #[error("exact rotation set unavailable in dimension {dim} (only n <= 2)")]
    ExactModeUnavailable { dim: usize },

    /// Graph not strongly connected where the max-plus eigenproblem requires it.
    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    /// Interior approximation requested but the rotation set has empty interior.
    #[error("rotation set is degenerate (empty interior)")]
    DegenerateRotationSet,

    /// A rational literal could not be parsed.
    #[error("cannot parse rational '{input}' (expected integer or p/q with integer parts)")]
    ParseRational { input: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Invariant of an internal algorithm broken; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
