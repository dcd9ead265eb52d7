use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("unsupported dimension {0}; only d in 1..=3 is implemented")]
    UnsupportedDimension(usize),

    #[error("quadrature did not converge: best estimate {estimate:e}, error bound {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
