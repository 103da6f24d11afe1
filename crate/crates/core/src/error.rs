use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("degenerate form (determinant 0)")]
    Degenerate,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("cross coefficient of x{0}x{1} is odd; the bilinear form would not be integral")]
    NonClassicForm(usize, usize),
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("could not factor {0} within the configured effort")]
    FactorizationLimit(String),
    #[error("enumeration budget of {budget} vectors exceeded")]
    EnumerationBudgetExceeded { budget: u64 },
    #[error("integer too large for enumeration: {0}")]
    Overflow(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
