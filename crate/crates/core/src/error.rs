use alloc::string::String;
use core::fmt;

/// Errors raised by the filtering core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// The regularized Gram matrix was not positive definite.
    NumericFailure(String),
    /// A weight update produced a non-finite coefficient.
    Divergence {
        /// Zero-based index of the sample whose update diverged.
        sample: u64,
    },
    /// Steady-state inputs contradict the Cauchy-Schwarz bound on the cross-EMSE.
    AnalysisViolation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::NumericFailure(m) => write!(f, "numeric failure: {m}"),
            Error::Divergence { sample } => write!(f, "filter diverged at sample {sample}"),
            Error::AnalysisViolation(m) => write!(f, "analysis violation: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
