use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: field `{field}`: {message}")]
    Malformed {
        path: PathBuf,
        line: u64,
        field: String,
        message: String,
    },

    #[error("{path}: duplicate date {date}")]
    DuplicateDate { path: PathBuf, date: NaiveDate },

    #[error("{path}: date {date} is out of order")]
    OutOfOrder { path: PathBuf, date: NaiveDate },

    #[error("{path}: no observations")]
    Empty { path: PathBuf },

    #[error("{path}: market_cap not allowed for stocks")]
    MarketCapForStock { path: PathBuf },

    #[error("unknown index id `{0}` (expected VIX, NASDAQ, DJI or SPX)")]
    UnknownIndex(String),

    #[error("{path}: empty top-performer list for year {year}")]
    EmptyTopList { path: PathBuf, year: i32 },

    #[error("{path}: {message}")]
    TopList { path: PathBuf, message: String },

    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),

    #[error("empty panel for window {window} at scale {scale}")]
    EmptyPanel { window: String, scale: u8 },

    #[error("perturbation {measure}: no agent defined at any period")]
    NoPerturbation { measure: String },

    #[error("measure {measure} needs index {index}, which was not loaded or has no data in window {window}")]
    MissingIndex {
        measure: String,
        index: String,
        window: String,
    },

    #[error("measure {measure} invalid for {kind}")]
    InvalidMeasure { measure: String, kind: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("{0}")]
    Analysis(String),

    #[error("config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
