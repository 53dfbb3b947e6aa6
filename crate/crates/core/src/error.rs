use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("prime table only covers primes up to {bound}; {n} needs a larger table")]
    NeedsLargerTable { n: u64, bound: u64 },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("ill-conditioned design: {0}")]
    IllConditioned(String),

    #[error("invalid anchor {anchor}: {reason}")]
    InvalidAnchor { anchor: Complex64, reason: String },

    #[error("evaluation point {0} is a pole")]
    Pole(Complex64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub(crate) fn check_finite(s: Complex64, what: &str) -> Result<()> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {s}")))
    }
}
