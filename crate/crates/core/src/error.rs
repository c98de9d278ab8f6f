use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: missing required column '{column}'", path.display())]
    MissingColumn { path: PathBuf, column: String },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("data error: {0}")]
    Data(String),

    #[error("degenerate corpus: {0}")]
    DegenerateCorpus(String),

    #[error("no sentiment result for tweet id {0}")]
    MissingSentiment(u64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("stage '{stage}' requires stage '{prerequisite}' to have run first (missing {})", missing.display())]
    MissingStage {
        stage: &'static str,
        prerequisite: &'static str,
        missing: PathBuf,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line front end.
    ///
    /// 1 usage/config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::MissingStage { .. } => 1,
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}
