use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value violated a type invariant at construction time.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The requested target cannot be met by any admissible argument.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A user-indexed infeasibility (e.g. one vehicle cannot reach its rate).
    #[error("user {user} infeasible: {reason}")]
    UserInfeasible { user: usize, reason: String },

    /// The min-max allocation could not fit the power budget at the latency cap.
    #[error("power budget exceeded by {deficit_w:.6e} W at the latency cap of {latency_cap_s} s")]
    PowerDeficit { deficit_w: f64, latency_cap_s: f64 },

    /// Latency shorter than one symbol or bandwidth narrower than one subcarrier.
    #[error("degenerate resource grid: {0}")]
    DegenerateGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lrtd fit needs at least 5 tail points spanning one decade: {0}")]
    InsufficientSpan(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("effective bandwidth overflow: theta*packet_bits = {0} > 700")]
    Overflow(f64),

    #[error("geometry: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        what,
        reason: reason.into(),
    }
}
