use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: duplicate key ({dataset}, {algorithm}, subset {subset})")]
    DuplicateKey {
        line: u64,
        dataset: String,
        algorithm: String,
        subset: u8,
    },

    #[error("input has no records")]
    Empty,

    #[error("incomplete matrix: {} missing cell(s): {}", .cells.len(), format_cells(.cells))]
    IncompleteMatrix { cells: Vec<(String, String)> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero variance in the data")]
    ZeroVariance,

    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),

    #[error("non-finite value in chain {chain} at iteration {iteration}: {state}")]
    NonFinite {
        chain: usize,
        iteration: usize,
        state: String,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_cells(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(d, a)| format!("({d}, {a})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
