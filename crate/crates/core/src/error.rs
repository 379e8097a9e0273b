use thiserror::Error;

/// Failure of a single scalar evaluation (plain, interval or derivative-carrying).
///
/// Over intervals these are "cannot decide on this box" signals: the caller is
/// expected to subdivide the box and try again, never to treat them as a bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by a quantity that may be zero")]
    DivisionByZero,
    #[error("square root of a quantity that may be negative")]
    NegativeSqrt,
    #[error("{0}")]
    Degenerate(&'static str),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("rule evaluation failed for output point {index}: {source}")]
    RuleEval {
        index: usize,
        #[source]
        source: EvalError,
    },

    #[error("difference scheme of order {order} does not exist (residual {residual:e})")]
    NoDifferenceScheme { order: usize, residual: f64 },

    #[error("depth guard exceeded: {0}")]
    DepthGuard(String),

    #[error("derivative structure violation: {0}")]
    Structure(String),

    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
