use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A coefficient below the trusted range of a truncated series was requested.
    #[error("coefficient of z^{exponent} is outside the trusted range (known down to z^{floor})")]
    Untrusted { exponent: i64, floor: i64 },

    #[error("not invertible as a Laurent series: {0}")]
    NotInvertible(String),

    #[error("division not exact within trusted range: remainder term of total degree {degree}")]
    InexactDivision { degree: usize },

    #[error("branches collide at infinity: {0}")]
    BranchCollision(String),

    /// An exact identity that must hold by construction failed.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("rank deficiency, eigenvector pole hypothesis violated: {0}")]
    RankDeficient(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
