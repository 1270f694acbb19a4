use thiserror::Error;

/// Errors raised by targets, samplers, bound evaluators and the planner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step-size hypothesis violated: {0}")]
    StepHypothesis(String),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semi-definite (smallest eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("target has no Hessian oracle")]
    MissingHessian,

    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: u64 },

    #[error("no route to an initial W2 bound: target has neither a known minimizer nor a lower bound")]
    NoInitialBound,

    #[error("bound evaluation overflowed (natural log of the value is {log_value})")]
    Overflow { log_value: f64 },

    #[error("precision {epsilon} is unreachable: the bound cannot go below {floor}")]
    Infeasible { epsilon: f64, floor: f64 },

    #[error("mixture component does not match the shared certificate: {0}")]
    Component(String),

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
