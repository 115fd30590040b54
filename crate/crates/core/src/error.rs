use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {0} out of range (must be at most 65536)")]
    FieldOrderOutOfRange(u64),
    #[error("index {idx} out of range for F_{q}^{n}")]
    IndexOutOfRange { idx: u64, q: u32, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty tuple")]
    EmptyTuple,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate system: {0}")]
    Degenerate(String),
    #[error("columns {0} and {1} are not in the same column equivalence class")]
    NotEquivalent(usize, usize),
    #[error("list is degenerate: {0}")]
    DegenerateList(String),
    #[error("no collision found")]
    NoneFound,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("below threshold: |S| = {actual} < {required}")]
    BelowThreshold { required: u128, actual: usize },
    #[error("search exhausted: {0}")]
    Exhausted(String),
    #[error("evaluation budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical check failed: {0}")]
    Numeric(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
