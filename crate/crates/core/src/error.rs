use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("point {0} is outside the domain")]
    OutOfDomain(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid distribution id {0}")]
    InvalidDistributionId(usize),
    #[error("insufficient samples: have {have}, need {need}")]
    InsufficientSamples { have: usize, need: usize },
    #[error("unsatisfiable generator parameters: {0}")]
    Unsatisfiable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("calibration missing: {0}")]
    CalibrationMissing(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}
