use crate::expr::{EvalError, ParseError};
use crate::poly::PolyError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("invalid metric: {0}")]
    InvalidSpec(String),
    #[error("degenerate Hessian: det[T_ij] vanishes identically")]
    DegenerateHessian,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("1-form is not of unit norm (|b|^2 = {norm_sq})")]
    NotUnitNorm { norm_sq: f64 },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("integration step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
