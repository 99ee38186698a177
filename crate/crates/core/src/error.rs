use thiserror::Error;

/// Which of the two Jacobian factorizations of a Newton-Traub step failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorStage {
    /// `G'(x_t)`, shared by the `y` and `z` sub-steps.
    AtX,
    /// `G'(y_t)`, used by the final sub-step.
    AtY,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} outside the domain of {what} ({detail})")]
    Domain {
        what: &'static str,
        value: f64,
        detail: String,
    },

    #[error("quadrature did not reach tolerance {tol:e} within {evals} evaluations (estimate {estimate}, error {abs_err:e})")]
    Quadrature {
        tol: f64,
        evals: usize,
        estimate: f64,
        abs_err: f64,
    },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("no feasible radius in (0, {search_hi}] for {condition}")]
    NoRadius {
        condition: &'static str,
        search_hi: f64,
    },

    #[error("no root of {what} found in (0, {search_hi}]")]
    NotFound { what: &'static str, search_hi: f64 },

    #[error("singular matrix (pivot {pivot:e} in column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("singular Jacobian in factorization {stage:?} (column {column})")]
    SingularJacobian { stage: FactorStage, column: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        value,
        detail: detail.into(),
    }
}
