use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("precision of {0} bits is below the 53-bit minimum")]
    Precision(u32),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("secular term at k={k}: exponent (h={h}, l={l}) collides with the forced exponent")]
    SecularTerm { k: u32, h: u32, l: u32 },

    #[error("step underflow: mode {k} left the admissible range after t={t}")]
    StepUnderflow { k: usize, t: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Smallest accepted working precision for big-float evaluation.
pub const MIN_PRECISION: u32 = 53;

pub(crate) fn check_precision(bits: u32) -> Result<()> {
    if bits < MIN_PRECISION {
        return Err(Error::Precision(bits));
    }
    Ok(())
}
