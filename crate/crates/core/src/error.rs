use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("defining polynomial is not squarefree")]
    NotSquarefree,
    #[error("polynomial must be monic of degree at least one")]
    NotMonic,
    #[error("root iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("element is not a unit of the order: {0}")]
    NotAUnit(String),
    #[error("Gram matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),
    #[error("presentation matrix is singular")]
    SingularPresentation,
    #[error("numerical rank is ambiguous: {0}")]
    RankAmbiguous(String),
    #[error("theta out of range: {0}")]
    ThetaOutOfRange(String),
    #[error("trivial-holonomy torsion form is divergent at j = 0")]
    TrivialHolonomyAtJZero,
    #[error("element is not invertible in the quotient ring")]
    NotInvertible,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures of the numerical machinery, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence(_) | Error::RankAmbiguous(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
