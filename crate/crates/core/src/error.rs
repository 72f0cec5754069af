use thiserror::Error;

/// Errors produced anywhere in the sampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no edges")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error(
        "diffusion stopped at coverage {achieved:.6} below target {target:.6} after {cascades} cascades"
    )]
    PartialCoverage {
        achieved: f64,
        target: f64,
        cascades: usize,
    },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("average is undefined over an empty element set")]
    EmptyElementSet,

    #[error("accuracy is undefined for a non-positive reference average")]
    ZeroReference,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 1,
            Error::PartialCoverage { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
