use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not a supported prime (need prime q, 2 <= q < 2^61)")]
    InvalidModulus(u64),
    #[error("operands belong to different fields (F_{left} vs F_{right})")]
    MismatchedField { left: u64, right: u64 },
    #[error("zero has no multiplicative inverse")]
    NonInvertible,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square ({rows} rows, a row of {cols} columns)")]
    NotSquare { rows: usize, cols: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unsupported parameters for {scheme}: {reason}")]
    Unsupported { scheme: &'static str, reason: String },
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("transcript records no downloaded symbols")]
    EmptyTranscript,
    #[error("common randomness pool exhausted (need {needed}, {remaining} left)")]
    PoolExhausted { needed: usize, remaining: usize },
    #[error("write issued without a read query for round {0}")]
    MissingReadQuery(u64),
    #[error("duplicate index {0} in sparse update")]
    DuplicateIndex(usize),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("no popularity history to select from")]
    NoHistory,
    #[error("randomness space of size {size} exceeds enumeration cap {cap}; use sampled mode")]
    SpaceTooLarge { size: u128, cap: u128 },
    #[error("capacity is not characterized for K = {k}, P = {p}")]
    UncharacterizedRegime { k: u64, p: u64 },
    #[error("decoding failed: {0}")]
    DecodeFailure(String),
}
