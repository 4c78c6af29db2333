use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample size must be at least one")]
    EmptySample,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value {value} lies outside {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("radius grid must be nonnegative and strictly increasing")]
    NonMonotoneGrid,

    #[error("linear system is singular")]
    Singular,

    #[error("row {row} has all-equal proximities; neighbor ranks are undefined")]
    DegenerateRow { row: usize },

    #[error("block variance estimate is zero")]
    DegenerateVariance,

    #[error("statistic has no mean vector attached")]
    MissingMean,

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("blocking infeasible at n = {n}: floor(L_n) = {floor_l} < 2")]
    BlockingInfeasible { n: usize, floor_l: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
