use thiserror::Error;

/// Errors raised across code analysis, simulation, decoding and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("unknown group {0}")]
    UnknownGroup(usize),

    #[error("invalid merge: {0}")]
    InvalidMerge(String),

    #[error("codebook too large: {size} candidates exceeds cap {cap}")]
    CodebookTooLarge { size: u128, cap: u128 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hermite order {0} is numerically unstable on this grid")]
    UnstableOrder(usize),

    #[error("degenerate pulse family: numerical rank {rank} < {expected}")]
    DegenerateFamily { rank: usize, expected: usize },

    #[error("sample grid mismatch: {0}")]
    GridMismatch(String),

    #[error("group count mismatch: expected {expected}, got {got}")]
    GroupCountMismatch { expected: usize, got: usize },

    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    #[error("structure mismatch: {0}")]
    StructureMismatch(String),

    #[error("strategy not applicable, code/constellation not separable: {0}")]
    NotSeparable(String),

    #[error("parse error{}: line {line}: {msg}", block.map(|b| format!(" in block {b}")).unwrap_or_default())]
    Parse {
        block: Option<usize>,
        line: usize,
        msg: String,
    },

    #[error("invalid config field `{field}`{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    ConfigInvalid {
        field: String,
        line: Option<usize>,
        msg: String,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &str, msg: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.to_string(),
            line: None,
            msg: msg.into(),
        }
    }

    pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// Process exit code for the CLI: 2 for configuration/input problems, 3 for
    /// numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) | Error::DegenerateFamily { .. } | Error::UnstableOrder(_) => 3,
            _ => 2,
        }
    }
}
