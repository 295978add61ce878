use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tensor order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("contraction with p = {p} is not supported for order-{order} tensors")]
    UnsupportedContraction { p: usize, order: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("column expansion needs {columns} columns, cap is {cap}")]
    ColumnCapExceeded { columns: u128, cap: usize },

    #[error("dense oracle needs {entries} entries, budget is {budget}")]
    BudgetExceeded { entries: u128, budget: usize },

    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("degenerate iterate at iteration {iteration}: {reason}")]
    DegenerateIterate { iteration: usize, reason: String },

    #[error("non-finite values encountered: {0}")]
    NumericalFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
