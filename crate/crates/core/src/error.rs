use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("argument on branch cut: {0}")]
    Cut(String),
    #[error("parameter degeneracy: {0}")]
    Degenerate(String),
    #[error("accuracy not reached: {0}")]
    Accuracy(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("resonant exponents: {0}")]
    Resonance(String),
    #[error("step size underflow: {0}")]
    StepUnderflow(String),
    #[error("negative radicand: {0}")]
    NegativeRadicand(String),
    #[error("reality violation: {0}")]
    Reality(String),
    #[error("probe outside box: {0}")]
    ProbeOutside(String),
    #[error("interface exit anomaly: {0}")]
    PathExit(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Short machine-readable tag, used in JSON diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Pole(_) => "pole",
            Error::Cut(_) => "cut",
            Error::Degenerate(_) => "degenerate",
            Error::Accuracy(_) => "accuracy",
            Error::Singular(_) => "singular",
            Error::Resonance(_) => "resonance",
            Error::StepUnderflow(_) => "step_underflow",
            Error::NegativeRadicand(_) => "negative_radicand",
            Error::Reality(_) => "reality",
            Error::ProbeOutside(_) => "probe_outside",
            Error::PathExit(_) => "path_exit",
            Error::Invalid(_) => "invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
