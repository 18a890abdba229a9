use thiserror::Error;

use crate::model::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no such vertex: {0}")]
    UnknownVertex(VertexId),

    #[error("underflow: vertex at level {level} has no ancestors {s} levels up")]
    Underflow { level: usize, s: usize },

    #[error("unknown colour {0}")]
    UnknownColour(usize),

    #[error("cell out-valency mismatch: {0}")]
    ValencyMismatch(String),

    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),

    #[error("rho undefined below level k (level {level}, k {k})")]
    RhoUndefined { level: usize, k: usize },

    #[error("horizon out of range: {0}")]
    HorizonOutOfRange(String),

    #[error("pins are not level-compatible: {0} -> {1}")]
    IncompatiblePin(VertexId, VertexId),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("extension failed: {0}")]
    ExtensionFailed(String),

    #[error("no colour: {0}")]
    NoColour(String),

    #[error("transitivity deficit at horizon: {0}")]
    TransitivityDeficit(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("step {step}: {inner}")]
    AtStep { step: usize, inner: Box<Error> },
}

impl Error {
    /// The innermost error, looking through step wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { inner, .. } => inner.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
