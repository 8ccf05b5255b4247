use std::path::PathBuf;

/// Every failure the core library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("negative speed {value} at row {row}, column {col}")]
    NegativeSpeed { row: usize, col: usize, value: f64 },
    #[error("series too short: {0}")]
    TooShort(String),
    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    BadFractions((f64, f64, f64)),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("normalization scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("hop count must be at least 1, got {0}")]
    BadK(usize),
    #[error("adjacency must be symmetric with zero diagonal: {0}")]
    NonSymmetric(String),
    #[error("steps per day ({0}) is not divisible by three")]
    NotDivisibleByThree(usize),
    #[error("gamma must lie in 1..={max}, got {gamma}")]
    BadGamma { gamma: usize, max: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("hop {hop} out of range 1..={k}")]
    BadHop { hop: usize, k: usize },
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("link {link} out of range for {n} links")]
    BadLink { link: usize, n: usize },
    #[error("day {0} is not fully covered by the series")]
    BadDay(usize),
    #[error("every target is zero, MAPE is undefined")]
    AllTargetsZero,
    #[error("checkpoint parse error at line {line}: {reason}")]
    Checkpoint { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
