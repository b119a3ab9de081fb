use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("eigenvalue iteration did not converge (dim {dim}, {iterations} iterations, active block {active}, subdiagonal {residual:e})")]
    EigenNonConvergence {
        dim: usize,
        iterations: usize,
        active: usize,
        residual: f64,
    },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration budget exceeded: {requested} words requested, budget {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("non-proximal element: {0}")]
    NonProximal(String),

    #[error("functional not positive on limit cone: {0}")]
    NotPositive(String),

    #[error("functional not positive on comparison limit cone: {0}")]
    NotPositiveComparison(String),

    #[error("too few classes: {have} available, {need} required")]
    TooFewClasses { have: usize, need: usize },

    #[error("too many skipped classes: {skipped} of {total}")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("invalid Schottky data: {0}")]
    InvalidSchottky(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
