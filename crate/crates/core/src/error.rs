//! Error taxonomy shared by the library and the command-line tool.
//!
//! The three variants map one-to-one onto the CLI exit codes:
//! condition-check failures exit 1, configuration errors exit 2 and
//! numerical failures (NaN, unresolved quadrature) exit 3.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A theorem hypothesis or admissibility inequality does not hold.
    /// The message names the failing inequality and both sides' values.
    #[error("condition violated: {0}")]
    Condition(String),

    /// Invalid parameter or run configuration; the message names the key.
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure: overflow to NaN, unresolved quadrature, ...
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Process exit code assigned to this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Condition(_) => 1,
            Error::Config(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
