use std::io;
use std::path::PathBuf;

/// Errors of the IO, archive and command-line layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] metacell_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("design failed: {}", .0.name())]
    Design(metacell_core::design::FailureKind),
    #[error("invalid genome file: {0}")]
    GenomeFormat(String),
    #[error("not an archive file (bad magic or unsupported version {0})")]
    ArchiveHeader(u8),
    #[error("archive already contains run {run:?} individual {id}")]
    DuplicateKey { run: String, id: u64 },
    #[error("corrupt archive record at byte {offset}: {reason}")]
    CorruptRecord { offset: u64, reason: String },
    #[error("{0} already exists; pass --force to overwrite")]
    AlreadyExists(PathBuf),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
