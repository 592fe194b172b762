use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid cyclic factor {0}: every factor must be at least 2")]
    InvalidFactor(u64),
    #[error("group order overflows the index space")]
    OrderOverflow,
    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch { left: String, right: String },
    #[error("element has {got} residues but the group has {expected} factors")]
    ElementArity { expected: usize, got: usize },
    #[error("residue {value} at position {index} is not reduced modulo {factor}")]
    ResidueRange { index: usize, value: u64, factor: u64 },
    #[error("expected {expected} generator images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("map is not well defined: {order} * image[{index}] is not zero")]
    IllDefinedHom { index: usize, order: u64 },
    #[error("presentation mismatch: {0}")]
    Presentation(String),
    #[error("group of order {order} exceeds the automorphism bound {bound}")]
    AutomorphismBound { order: usize, bound: usize },
    #[error("automorphism group has more than {0} elements")]
    AutomorphismCount(usize),
    #[error("sequence is not a subsequence of the minuend")]
    NotSubsequence,
    #[error("length {len} is outside 0..={max}")]
    LengthOutOfRange { len: usize, max: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("group of order {0} is too large for exhaustive search (limit 64)")]
    SearchLimit(usize),
    #[error("lemma falsified: {0}")]
    Falsified(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
