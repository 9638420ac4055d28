use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular linear system in {context}")]
    Singular { context: &'static str },

    #[error("QR iteration did not converge (active block ending at row {index})")]
    NoConvergence { index: usize },

    #[error("wave speed c = {re} + {im}i lies within {guard:e} of V at Y = {y}")]
    PoleProximity { y: f64, re: f64, im: f64, guard: f64 },

    #[error("Newton iteration failed after {iterations} steps (last c = {re:e} + {im:e}i, |F| = {residual:e})")]
    NewtonFailed {
        iterations: usize,
        re: f64,
        im: f64,
        residual: f64,
    },

    #[error("step {step:e} does not resolve the viscous layer; need step <= {required:e}")]
    Underresolved { step: f64, required: f64 },

    #[error("degenerate sublayer: {0}")]
    Degenerate(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
