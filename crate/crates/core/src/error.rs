use thiserror::Error;

use crate::simulate::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input that violates a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve or root polish did not meet its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("step size underflow at t = {t}: step {step:e} below minimum (problem may be stiff)")]
    Stiffness { t: f64, step: f64 },

    #[error("solution diverged at t = {t}: state norm {norm:e}")]
    Divergence {
        t: f64,
        norm: f64,
        partial: Box<Trajectory>,
    },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Validation(_))
    }
}
