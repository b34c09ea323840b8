use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported wavelet filter: {0} vanishing moments (supported: 1..=10)")]
    UnsupportedFilter(usize),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("level error: {0}")]
    Level(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank deficiency: {what} has reciprocal condition number {rcond:e} (threshold {threshold:e})")]
    RankDeficient {
        what: &'static str,
        rcond: f64,
        threshold: f64,
    },

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
