use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Grids or models are not set up consistently with each other.
    #[error("configuration error: {0}")]
    Config(String),

    /// Data handed to an operation violates its preconditions.
    #[error("input error: {0}")]
    Input(String),

    /// The spectrum has no recognizable main correlation peak at zero delay.
    #[error("malformed spectrum: {0}")]
    MalformedSpectrum(String),

    #[error("numerical error: {message} (estimate {estimate:e}, error {error:e}, {evaluations} evaluations)")]
    Numerical {
        message: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}
