use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error(
        "eigenpair {index} did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NotConverged {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error(
        "rank deficient: requested t = {requested} but only {achievable} nonzero components exist"
    )]
    RankDeficient { requested: usize, achievable: usize },

    #[error("probe direction is not unit norm (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("partition function overflows")]
    Overflow,

    #[error("class {class} has a single example and cannot be split")]
    SingletonClass { class: usize },

    #[error("synthetic spec needs {required} orthogonal directions but dim is {dim}")]
    SynthDimension { required: usize, dim: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("trailing bytes: expected {expected} bytes, found {actual}")]
    TrailingBytes { expected: usize, actual: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        line: usize,
        column: usize,
        value: String,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error("report line {line}: {message}")]
    ReportParse { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::UnsupportedDtype(_)
            | Error::Truncated { .. }
            | Error::TrailingBytes { .. }
            | Error::InvalidModel(_)
            | Error::RaggedRow { .. }
            | Error::NonNumeric { .. }
            | Error::Csv(_)
            | Error::ReportParse { .. } => 4,
            Error::EmptyInput
            | Error::DimensionMismatch { .. }
            | Error::NonFinite { .. }
            | Error::InvalidArgument(_)
            | Error::SingletonClass { .. }
            | Error::SynthDimension { .. }
            | Error::NotUnitVector { .. } => 5,
            Error::NotSymmetric { .. }
            | Error::NotPositiveSemidefinite { .. }
            | Error::NotConverged { .. }
            | Error::RankDeficient { .. }
            | Error::Overflow => 6,
        }
    }
}
