use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to an exit code
/// with [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("branch error: {0}")]
    Branch(String),
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("move not applicable: {0}")]
    MoveInapplicable(String),
    #[error("closing failure: {0}")]
    NotClosing(String),
    #[error("quadrature did not converge, best estimate {estimate:e} (error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 1 for domain and usage type errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Quadrature { .. } | Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
