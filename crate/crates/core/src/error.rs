use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gamma (or a Gamma quotient) evaluated at a non-positive integer.
    #[error("pole of Gamma at z = {0}")]
    Pole(i64),

    /// Discretisation too coarse, or a quadrature failed to converge.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("input error: {0}")]
    Input(String),

    /// A sampled grid does not cover the spectrum it is applied to.
    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("operator is not sectorial: {0}")]
    NotSectorial(String),

    /// Point in the spectrum where a resolvent was requested.
    #[error("singular: {0}")]
    Singular(String),

    /// Contour passes too close to the spectrum.
    #[error("contour error: {0}")]
    Contour(String),

    /// Search budget exhausted without a certificate.
    #[error("search failed: {0}")]
    Search(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn resolution(msg: impl Into<String>) -> Self {
        Error::Resolution(msg.into())
    }
}
