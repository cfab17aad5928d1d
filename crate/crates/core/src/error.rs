use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parity violation: r = {r} and s = {s} differ mod 2")]
    Parity { r: i64, s: i64 },

    #[error("negative rank {0}")]
    NegativeRank(i64),

    #[error("content of the zero vector is undefined")]
    ZeroVector,

    #[error("vector is not primitive")]
    NotPrimitive,

    /// Fixed-width arithmetic would have wrapped. Distinct from every
    /// mathematical failure so callers never mistake it for a verdict.
    #[error("integer overflow in lattice arithmetic")]
    Overflow,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unreachable target: {0}")]
    Unreachable(String),

    #[error("search bound exceeded: {what} (radius {radius})")]
    SearchBound { what: &'static str, radius: u32 },

    #[error("step cap of {0} reduction rounds exceeded")]
    StepCap(usize),

    #[error("trace step {index}: {reason}")]
    Trace { index: usize, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SearchBound { .. } | Error::StepCap(_) | Error::Overflow => 2,
            Error::Internal(_) => 4,
            _ => 1,
        }
    }
}
