use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("entry ({row}, {col}) lies outside a {dim}x{dim} matrix")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error(
        "matrix is not Hermitian: entry ({row}, {col}) deviates from its mirror by {deviation:e} \
         (allowed {allowed:e})"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        allowed: f64,
    },

    #[error("non-finite value at ({row}, {col})")]
    NonFiniteValue { row: usize, col: usize },

    #[error("entrywise power undefined for entry ({row}, {col}): value is negative or complex")]
    ComplexPowerUndefined { row: usize, col: usize },

    #[error("exponent p = {0} is outside the admissible range")]
    POutOfRange(f64),

    #[error("exponents p = {p}, q = {q} are not Hölder conjugates")]
    ConjugateExponentMismatch { p: f64, q: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    ConvergenceFailure { sweeps: usize, off_diagonal: f64 },

    #[error("matrix is not a sparse-access input (spectral norm above 1 or singular)")]
    NotSparseAccess,

    #[error("{0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// True for errors caused by bad input data rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::ConvergenceFailure { .. })
    }
}
