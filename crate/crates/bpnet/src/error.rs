use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: bpnet_core::Error,
    },
    #[error("{count} of {total} files failed: {names}")]
    Batch { count: usize, total: usize, names: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn core(context: impl Into<String>, source: bpnet_core::Error) -> Self {
        Error::Core {
            context: context.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Core {
                source: bpnet_core::Error::NumericFailure(_),
                ..
            } => 3,
            _ => 2,
        }
    }
}

/// Attaches context to core results.
pub trait CoreContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> CoreContext<T> for bpnet_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::core(what(), e))
    }
}
