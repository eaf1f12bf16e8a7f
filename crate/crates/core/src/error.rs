use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {left} cells vs {right} cells")]
    GridMismatch { left: usize, right: usize },

    #[error("selection window [0, {eps}] holds {cells:.3} cells; at least 4 are required")]
    UnresolvedWindow { eps: f64, cells: f64 },

    #[error("field contains a non-finite value at node {node}")]
    NonFiniteField { node: usize },

    #[error("non-finite state at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("threshold {rho0} not reached by t = {horizon}")]
    ThresholdUnreachable { rho0: f64, horizon: f64 },

    #[error("eigenvalue scan lost a mode: {detail}")]
    MissedMode { detail: String },

    #[error("root finding failed: {0}")]
    RootNotFound(String),

    #[error("quadrature on [{a}, {b}] did not converge for {what} (error estimate {estimate:.3e})")]
    Quadrature {
        what: String,
        a: f64,
        b: f64,
        estimate: f64,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
