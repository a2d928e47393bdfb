use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: row {row}, column {column}: cannot parse {value:?} as a number", path.display())]
    Parse { path: PathBuf, row: u64, column: usize, value: String },
    #[error("{}: row {row} has {found} fields, column {column} requested", path.display())]
    MissingColumn { path: PathBuf, row: u64, column: usize, found: usize },
    #[error("bad column selection {0:?}")]
    Columns(String),
    #[error("{rows} rows loaded, at least {needed} needed")]
    TooFewRows { rows: usize, needed: usize },
    #[error("{}: malformed log: {reason}", path.display())]
    Log { path: PathBuf, reason: String },
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] kmedo_core::Error),
}

impl BenchError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Spec(_) | BenchError::Columns(_) => 1,
            BenchError::Core(kmedo_core::Error::InvalidConfig(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
