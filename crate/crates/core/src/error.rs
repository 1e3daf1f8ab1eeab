use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} = {value} is outside {expected}")]
    Domain { name: &'static str, value: f64, expected: String },

    /// Malformed input file.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A size guard refused to run an exponential-time computation.
    #[error("refused: {0}")]
    Guard(String),

    /// Structurally invalid arguments (length mismatch, empty grid, ...).
    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: impl Into<String>) -> Self {
        Error::Domain { name, value, expected: expected.into() }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
