use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a dyadic number (expected 1, 2, 4, ...)")]
    NotDyadic(u64),

    #[error("index ({n1}, {n2}) lies outside the cutoff box of half-width {cutoff}")]
    OutsideCutoff { n1: i32, n2: i32, cutoff: u32 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("search space of {points:.3e} points exceeds the guard of {limit:.3e}")]
    ResourceGuard { points: f64, limit: f64 },

    #[error("observable `{0}` is unbounded and cannot be used in an equality test")]
    UnboundedObservable(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
