use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("normalization error: entries sum to {sum}, expected 1 within {tol:e}")]
    Normalization { sum: f64, tol: f64 },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_same_n(a: u32, b: u32) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{a} qubits vs {b} qubits")));
    }
    Ok(())
}
