use thiserror::Error;

use crate::calculus::expr::ParseError;
use crate::calculus::field::EvalError;
use crate::calculus::quadrature::QuadratureError;
use crate::io::CsvError;
use crate::systems::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("metric is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("time {t} outside [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },
    #[error("interval [{a0}, {a1}] does not match [{b0}, {b1}]")]
    IntervalMismatch { a0: f64, a1: f64, b0: f64, b1: f64 },
    #[error("{what}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("{what}: singular Jacobian (residual {residual:e})")]
    SingularJacobian { what: &'static str, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Csv(#[from] CsvError),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// True for failures that signal a non-invertible Legendre map or Hessian.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::SingularJacobian { .. })
    }

    pub fn is_nonconvergence(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
