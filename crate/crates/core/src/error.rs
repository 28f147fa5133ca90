use thiserror::Error;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("forms live in different monomial orders")]
    MismatchedOrders,

    #[error("basis is linearly dependent (numeric rank {rank} of {expected})")]
    DependentBasis { rank: usize, expected: usize },

    #[error("unsupported context n={n}, d={d}")]
    UnsupportedContext { n: usize, d: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },

    #[error("degenerate form: {0}")]
    DegenerateForm(String),

    #[error("degenerate contact: quadratic part of the determinant is singular")]
    DegenerateContact,

    #[error("form is not a sum of squares (Gram slice infeasible)")]
    Infeasible,

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("direction has the wrong class: {0}")]
    WrongClass(String),

    #[error("matrix is not positive semidefinite (negative pivot at step {step})")]
    NotPsd { step: usize },

    #[error("sampling failed: {accepted} accepted out of {trials} trials")]
    SamplingFailure { accepted: usize, trials: u64 },

    #[error("too many solver failures: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, GramError>;
