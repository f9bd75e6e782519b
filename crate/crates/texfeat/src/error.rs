use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Unsupported or malformed file contents (image headers, feature CSVs,
    /// model JSON). The message carries row/column diagnostics where they
    /// exist.
    #[error("format error: {0}")]
    Format(String),

    /// Image too small for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Out-of-range or inconsistent parameter (quantization levels, KNN k, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// An image/offset combination that yields no co-occurring pixel pairs.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("split error: {0}")]
    Split(String),

    /// Not enough rows to fit standardization statistics.
    #[error("statistics error: {0}")]
    Statistics(String),

    /// Model and feature file were produced under different extraction
    /// configurations; comparing them would be meaningless.
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
