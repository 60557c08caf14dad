use thiserror::Error;

/// Errors produced by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("unsupported builtin profile `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at x = {x} (h = {h:e}); the problem is too stiff for the explicit integrator")]
    StepUnderflow { x: f64, h: f64 },
    #[error("non-finite state encountered at x = {x}")]
    NonFinite { x: f64 },

    #[error("tan/cos pole at kappa = {kappa}")]
    Pole { kappa: f64 },
    #[error("alpha = {alpha} is not in the resonance set (residual {residual:e})")]
    NotResonant { alpha: f64, residual: f64 },
    #[error("alpha = {alpha} is resonant; the Neumann problem is singular (residual {residual:e})")]
    Resonant { alpha: f64, residual: f64 },
    #[error("root not bracketed on [{a}, {b}]")]
    NotBracketed { a: f64, b: f64 },

    #[error("truncation radius too small: eigenvalue {eigenvalue} is within {margin} of the wall potential {wall}")]
    Truncation { eigenvalue: f64, wall: f64, margin: f64 },
    #[error("eigenvalue search window exhausted: {0}")]
    WindowExhausted(String),
    #[error("limit spectrum is not simple: {0}")]
    Degenerate(String),
    #[error("eigenvalue alignment failed: {0}")]
    Misalignment(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidProfile(_)
            | Error::UnknownBuiltin(_)
            | Error::InvalidConfig(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Config,
            Error::Precondition(_) => ErrorKind::Precondition,
            _ => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Precondition,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
