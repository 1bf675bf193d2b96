//! Error taxonomy shared by the whole crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of kernel, operator, and decomposition routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An input collection (dataset, coefficient vector, ...) was empty.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Two objects that must agree in dimension or length do not.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A kernel parameter is outside its valid range.
    #[error("invalid kernel parameter: {0}")]
    InvalidKernelParameter(String),

    /// A kernel specification string could not be parsed.
    #[error("cannot parse kernel specification `{0}`")]
    KernelParse(String),

    /// Two functions or operators built over different kernels were combined.
    #[error("kernel mismatch in {0}: operands use different kernels")]
    KernelMismatch(&'static str),

    /// A matrix that must be positive definite failed its Cholesky
    /// factorization. `pivot` is the 1-based index of the first failing pivot,
    /// which for a Gram matrix identifies the first data point that is
    /// (numerically) linearly dependent on its predecessors.
    #[error("matrix is not positive definite: Cholesky failed at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },

    /// A dense eigensolver or SVD driver reported failure.
    #[error("{driver} failed to converge (info = {info})")]
    LapackFailure { driver: &'static str, info: i32 },

    /// An eigendecomposition route was asked for a problem it cannot solve.
    #[error("{0}")]
    UnsupportedProblem(String),

    /// The spectrum violates the positive semi-definite structure the route
    /// relies on (e.g. an auxiliary matrix with a genuinely negative
    /// eigenvalue).
    #[error("broken PSD structure: eigenvalue {value:.6e} below tolerated noise floor {floor:.6e}")]
    IndefiniteSpectrum { value: f64, floor: f64 },

    /// The block-operator route found positive and negative spectra that do
    /// not mirror each other.
    #[error("block spectrum pairing check failed: {0}")]
    SpectrumPairing(String),

    /// A decomposition result required by the operation is empty.
    #[error("empty decomposition: {0}")]
    EmptyDecomposition(&'static str),

    /// An index or rank argument is out of range.
    #[error("{context}: {value} out of range (limit {limit})")]
    OutOfRange {
        context: &'static str,
        value: usize,
        limit: usize,
    },

    /// Adaptive integration gave up.
    #[error("integration failed: {0}")]
    Integration(String),

    /// A CSV file failed to parse.
    #[error("{path}:{line}: {message}")]
    CsvFormat {
        path: String,
        line: usize,
        message: String,
    },

    /// An experiment report failed to parse.
    #[error("report parse error at line {line}: {message}")]
    ReportFormat { line: usize, message: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of numerical routines (as opposed to bad usage or
    /// malformed inputs). The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::LapackFailure { .. }
                | Error::IndefiniteSpectrum { .. }
                | Error::SpectrumPairing(_)
                | Error::Integration(_)
        )
    }
}
