use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("direction has zero norm")]
    ZeroDirection,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tau must lie strictly inside (0, 1), got {0}")]
    InvalidTau(f64),

    /// `n * tau` is an integer, so the optimal hyperplane is not unique.
    #[error("n*tau = {0} is an integer; the solution set is not a singleton (use allow-degenerate)")]
    Nonunique(f64),

    /// A basis matrix became singular: the data are not in general position.
    #[error("data not in general position (observations {0:?})")]
    GeneralPosition(Vec<usize>),

    /// The simplex did not terminate; the offending basis is reported.
    #[error("degenerate problem, simplex stalled at basis {0:?}")]
    Degeneracy(Vec<usize>),

    #[error("regression design is singular: {0}")]
    SingularDesign(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("direction does not lie in the interior of the requested cone")]
    WrongCone,

    #[error("numerical tolerance failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("dataset has no observations")]
    EmptyDataset,
}

impl Error {
    /// True for errors caused by the input files rather than the numerics.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse { .. } | Error::EmptyDataset)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
