use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse error at row {row}, column {col}: {msg}")]
    CsvParse { row: usize, col: usize, msg: String },
    #[error("csv file {path} is empty")]
    EmptyCsv { path: String },
    #[error("ragged csv row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {row}, column {col}: {value}")]
    NonFinite { row: usize, col: usize, value: String },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("requested {requested} items but only {available} available")]
    CountExceedsData { requested: usize, available: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("block is not square ({rows}x{cols})")]
    NonSquareBlock { rows: usize, cols: usize },
    #[error("exact star discrepancy is only available for d <= 2 (got d = {0})")]
    ExactDiscrepancyDim(usize),
    #[error("exact union-volume computation requires at most {max} boxes (got {got})")]
    TooManyBoxes { max: usize, got: usize },
    #[error("{method} requires an SPSD kernel; {family} may be indefinite")]
    IndefiniteKernel { method: &'static str, family: String },
    #[error("problem size {n} exceeds the dense-solve guard {guard}")]
    OverGuard { n: usize, guard: usize },
    #[error("landmark set has no dataset indices (centroid-based selector)")]
    CentroidLandmarks,
    #[error("sigma resolved to a nonpositive value: {0}")]
    NonPositiveSigma(f64),
    #[error("non-finite kernel value for landmark pair ({i}, {j})")]
    NonFiniteKernel { i: usize, j: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
