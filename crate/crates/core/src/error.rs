use thiserror::Error;

/// Errors raised by the ball machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {norm:.6e} away from the origin is not inside the ball")]
    OutsideBall { norm: f64 },

    #[error("automorphism center must satisfy |a| < 1 (got |a| = {norm})")]
    BoundaryCenter { norm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite integrand value at node {index} ({point})")]
    NonFinite { index: usize, point: String },

    #[error("function does not vanish at the base point (|f(a)| = {value:.3e})")]
    NotVanishing { value: f64 },

    #[error("singular kernel configuration: Re(1 - <z,w>) = {re:.3e}")]
    SingularKernel { re: f64 },

    #[error("ill-conditioned Gram matrix (condition {cond:.3e}); nearest nodes {i} and {j}")]
    IllConditioned { cond: f64, i: usize, j: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("hyperballs {j} and {k} overlap")]
    Overlap { j: usize, k: usize },

    #[error("matrix singular at {location} (|det| = {det:.3e})")]
    SingularMatrix { det: f64, location: String },

    #[error("insufficient boundary margin: |z| = {norm}, step {h}")]
    Margin { norm: f64, h: f64 },

    #[error("radius search failed: {0}")]
    RadiusSearch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
