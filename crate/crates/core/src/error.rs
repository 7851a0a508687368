use std::io;

use thiserror::Error;

/// Every failure the toolkit can report. `code()` yields the stable
/// identifier used on the wire and on the CLI's stderr.
#[derive(Debug, Error)]
pub enum Error {
    #[error("token has no letters after canonicalization: {0:?}")]
    EmptyToken(String),
    #[error("phonetic level mismatch: expected k={expected}, got k={actual}")]
    LevelMismatch { expected: u8, actual: u8 },
    #[error("encoder configuration mismatch: expected {expected}, found {found}")]
    ConfigMismatch { expected: String, found: String },
    #[error("unsupported file version: {0}")]
    UnsupportedVersion(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("malformed document at line {line}: {reason}")]
    MalformedDocument { line: usize, reason: String },
    #[error("ratio {0} is outside [0, 1]")]
    RatioOutOfRange(f64),
    #[error("wordlist contains no admissible words")]
    EmptyWordlist,
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unparseable timestamp: {0:?}")]
    UnparseableTimestamp(String),
    #[error("scorer failure: {0}")]
    Scorer(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyToken(_) => "EmptyToken",
            Error::LevelMismatch { .. } => "LevelMismatch",
            Error::ConfigMismatch { .. } => "ConfigMismatch",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::CorruptFile(_) => "CorruptFile",
            Error::MalformedDocument { .. } => "MalformedDocument",
            Error::RatioOutOfRange(_) => "RatioOutOfRange",
            Error::EmptyWordlist => "EmptyWordlist",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::UnparseableTimestamp(_) => "UnparseableTimestamp",
            Error::Scorer(_) => "ScorerError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
