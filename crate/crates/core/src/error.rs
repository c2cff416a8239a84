use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing input file: {0}")]
    MissingFile(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("graph is already inverse-augmented")]
    AlreadyAugmented,

    #[error("mixed triples must share a tail (got {0} and {1})")]
    TailMismatch(usize, usize),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Divergence {
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("dataset and checkpoint are incompatible: {0}")]
    Incompatible(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("infeasible benchmark spec: {0}")]
    Infeasible(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    WouldOverwrite(PathBuf),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Config = 2,
    Data = 3,
    Runtime = 4,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::WouldOverwrite(_) => {
                ExitClass::Config
            }
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::MissingFile(_)
            | Error::Checkpoint(_)
            | Error::Incompatible(_)
            | Error::AlreadyAugmented
            | Error::Infeasible(_) => ExitClass::Data,
            Error::Shape(_)
            | Error::TailMismatch(..)
            | Error::NonFinite(_)
            | Error::Divergence { .. }
            | Error::Empty(_) => ExitClass::Runtime,
        }
    }
}
