//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by operators, solvers, and training.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid configuration or constructor argument.
    Config(String),
    /// An input does not match the shape an operation expects.
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Conjugate-gradient inner solve broke down (non-finite or indefinite).
    CgBreakdown { iteration: usize },
    /// Training loss became non-finite.
    NonFiniteLoss { stage: usize, epoch: usize },
    /// A set sampler could not produce a requested point.
    SamplerFailure(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::ShapeMismatch {
                context,
                expected,
                got,
            } => write!(
                f,
                "shape mismatch in {context}: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::CgBreakdown { iteration } => {
                write!(f, "conjugate gradient breakdown at ADMM iteration {iteration}")
            }
            Error::NonFiniteLoss { stage, epoch } => {
                write!(f, "non-finite training loss in stage {stage}, epoch {epoch}")
            }
            Error::SamplerFailure(what) => write!(f, "set sampler failure: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
