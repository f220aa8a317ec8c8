use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no edges or vertices")]
    EmptyInput,

    #[error("vertex {0} is out of range")]
    InvalidVertex(u64),

    #[error("direction {direction} does not match a {graph} graph")]
    DirectionMismatch { direction: &'static str, graph: &'static str },

    #[error("graph contains a cycle through vertex {0}")]
    Cycle(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("cannot combine a {left} partial with a {right} partial")]
    FunctionMismatch { left: &'static str, right: &'static str },

    #[error("edge ({0}, {1}) already exists")]
    DuplicateEdge(u64, u64),

    #[error("edge ({0}, {1}) does not exist")]
    MissingEdge(u64, u64),

    #[error("malformed index file: {0}")]
    Format(String),

    #[error("index was built for a different graph (fingerprint {expected:016x}, graph has {actual:016x})")]
    FingerprintMismatch { expected: u64, actual: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
