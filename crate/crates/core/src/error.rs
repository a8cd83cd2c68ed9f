use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("expression error: {0}")]
    Expr(#[from] crate::expr::ExprError),

    #[error("no ground state: {0}")]
    NoGroundState(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(
        "tail underflow in decay fit window; widen the window or tighten the w(0) bisection ({0})"
    )]
    TailUnderflow(String),

    #[error("coefficient {name} is not positive at {at:?} (value {value})")]
    NonPositiveCoefficient {
        name: &'static str,
        at: Vec<f64>,
        value: f64,
    },

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
