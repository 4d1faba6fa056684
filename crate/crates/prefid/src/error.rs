use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("data file not found: {0}")]
    MissingData(PathBuf),

    #[error(transparent)]
    Core(#[from] prefid_core::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),

    #[error("table {table}: {source}")]
    Table { table: u32, source: Box<Error> },
}

impl Error {
    pub fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_numerical() => 2,
            Error::Table { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    /// Short machine-readable category used on the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } | Error::MissingData(_) => "io",
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => "parse",
            Error::Core(e) if e.is_numerical() => "numerical",
            Error::Core(_) => "validation",
            Error::Usage(_) => "usage",
            Error::Table { source, .. } => source.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
