use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("outside numeric domain: {0}")]
    Domain(String),

    #[error("sampler infeasible: acceptance rate {rate:e} after {trials} trials")]
    SamplerInfeasible { trials: u64, rate: f64 },

    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: f64, cap: f64 },

    #[error("covering certificate invalid: atom {index} at {atom:?} lies in no homothet")]
    CertificateInvalid { index: usize, atom: Vec<f64> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::GridTooLarge { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Domain(_) | Error::SamplerInfeasible { .. } => 3,
            Error::CertificateInvalid { .. } => 4,
        }
    }
}
