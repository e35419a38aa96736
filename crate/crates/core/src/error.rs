use thiserror::Error;

/// Errors raised by the precision-limit computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampled point-spread function failed validation.
    #[error("invalid grid PSF: {0}")]
    InvalidGrid(String),

    /// A grid PSF file could not be parsed.
    #[error("grid file line {line}: {message}")]
    GridFile { line: usize, message: String },

    /// A quadrature or iterative estimate did not settle under refinement.
    #[error("non-convergence in {what}: {detail}")]
    NonConvergence { what: String, detail: String },

    /// A Fisher matrix could not be inverted.
    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_convergence(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            what: what.into(),
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
