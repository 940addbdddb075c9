use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("recurrence must have at least one coefficient")]
    EmptyRecurrence,

    #[error("recurrence of order {order} needs {order} initial terms, got {got}")]
    InitialTermsMismatch { order: usize, got: usize },

    #[error("first initial term must be 1, got {0}")]
    FirstTermNotOne(u64),

    #[error("term G_{index} = {value} is not positive")]
    NonPositiveTerm { index: usize, value: String },

    #[error("sequence is not strictly increasing at G_{index}")]
    NonIncreasingSequence { index: usize },

    #[error("recurrence has no positive coefficient")]
    NoPositiveCoefficient,

    #[error("window of length {n} is too short (need at least {required})")]
    WindowTooShort { n: usize, required: usize },

    #[error("state space of size {states} exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: String, cap: u64 },

    #[error("state space has a single state; there is no nontrivial eigenvalue")]
    DegenerateStateSpace,

    #[error("sequence is not first order with G_1 = 1")]
    NotFirstOrder,

    #[error("eigenvalue index {k} outside 1..={max}")]
    IndexOutOfRange { k: u64, max: u64 },

    #[error("walk did not reach the target distance within {steps} steps")]
    NoMixing { steps: u64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("domain error: {0}")]
    Domain(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
