use std::io;
use std::path::{Path, PathBuf};

/// Errors from loading files and running commands.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] burstset_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: malformed file: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("{}: header declares {declared} values but the payload holds {actual}", path.display())]
    Integrity {
        path: PathBuf,
        declared: usize,
        actual: usize,
    },

    #[error("{}: {reason}", path.display())]
    Data { path: PathBuf, reason: String },

    #[error("manifest {}: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },

    #[error("{}: cannot resolve {what} `{}`", manifest.display(), target.display())]
    Resolve {
        manifest: PathBuf,
        what: &'static str,
        target: PathBuf,
    },

    #[error("set `{set_id}`: {source}")]
    InSet {
        set_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn data(path: &Path, reason: impl Into<String>) -> Self {
        Error::Data {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn in_set(set_id: &str, source: impl Into<Error>) -> Self {
        Error::InSet {
            set_id: set_id.to_string(),
            source: Box::new(source.into()),
        }
    }

    /// 2 for invalid invocations and configuration, 1 for everything the
    /// input data is to blame for.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 2,
            Error::Core(burstset_core::Error::Parameter { .. })
            | Error::Core(burstset_core::Error::Config(_)) => 2,
            Error::InSet { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
