use thiserror::Error;

/// Errors surfaced by the function algebra, integrators, and CLI plumbing.
///
/// Everything here is loud by design: no operation silently approximates when
/// a closed form is missing or an input is out of contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Constructor rejected the data defining a function (asymmetric or
    /// indefinite quadratic, empty box, infeasible affine system, ...).
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    /// An operation was called with an out-of-contract scalar (mu <= 0, h <= 0, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function is not differentiable")]
    NotDifferentiable,

    /// `conjugate(0) = +inf`, i.e. `inf f = -inf`; normalization is impossible.
    #[error("function is unbounded below")]
    UnboundedBelow,

    /// The analytic minimal-norm oracle has no registered closed form for
    /// this function shape. The brute grid mode may still apply.
    #[error("no closed form: {0}")]
    NoClosedForm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The integrator produced a NaN or infinite state component.
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    /// A quantity that must be finite (an envelope value, an energy term)
    /// came out infinite.
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
