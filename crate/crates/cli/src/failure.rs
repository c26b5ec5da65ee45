use std::fmt;
use std::process::ExitCode;

use varmech::Error;

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    CheckFailed = 1,
    NoConvergence = 2,
    NotHyperregular = 3,
    Usage = 64,
    InputFormat = 65,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { exit: Exit::Usage, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure { exit: Exit::InputFormat, message: message.into() }
    }

    /// Treats a singular Legendre Jacobian as a hyperregularity failure
    /// rather than a solver failure.
    pub fn from_legendre(e: Error) -> Self {
        if e.is_singular() {
            Failure { exit: Exit::NotHyperregular, message: format!("Legendre map is not invertible: {e}") }
        } else {
            e.into()
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::NoConvergence { .. }
            | Error::SingularJacobian { .. }
            | Error::NonFinite(_)
            | Error::Eval(_)
            | Error::Quadrature(_) => Exit::NoConvergence,
            Error::InvalidArgument(_) | Error::TimeOutOfRange { .. } | Error::IntervalMismatch { .. } => Exit::Usage,
            _ => Exit::InputFormat,
        };
        Failure { exit, message: e.to_string() }
    }
}
