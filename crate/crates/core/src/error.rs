use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside an operation's domain (mismatched alphabets, bad levels).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violating a probability invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// An enumeration or atom budget would be exceeded.
    #[error("resource error: {0}")]
    Resource(String),

    /// A stated side condition of a bound does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate truncation: the typical set has zero probability")]
    DegenerateTruncation,

    /// The brute-force grid found no point matching the constraint.
    #[error("oracle inconclusive: {0}")]
    OracleInconclusive(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
