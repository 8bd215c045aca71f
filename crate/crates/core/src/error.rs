use thiserror::Error;

/// Errors raised by samplers, evaluators and integrators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite coordinate ({re}, {im}) rejected")]
    NonFinite { re: f64, im: f64 },

    #[error("point ({re}, {im}) lies outside the window")]
    OutsideWindow { re: f64, im: f64 },

    #[error("eigenvalue routine did not converge (seed {seed}); retry with another seed")]
    EigenNonConvergence { seed: u64 },

    #[error("sampler failed to mix: acceptance rate {rate:.2e} over the final sweeps")]
    MixingFailure { rate: f64 },

    #[error("particle collision: pair distance {distance:.3e} at particle {particle}")]
    Collision { particle: usize, distance: f64 },

    #[error("log value {value:.1} is outside the linear range; use the log-space evaluator")]
    LogUnderflow { value: f64 },

    #[error("point coincides with a conditioning point (distance {distance:.3e})")]
    Singular { distance: f64 },

    #[error("degenerate tuple: {0}")]
    Degenerate(String),

    #[error("point lies on the window boundary (|s| - R = {offset:.3e})")]
    OnBoundary { offset: f64 },

    #[error("time grids differ between trajectories")]
    InhomogeneousGrid,

    #[error("lag {0} is not on the trajectory time grid")]
    LagOffGrid(f64),

    #[error("trajectory horizon {available} shorter than required {required}")]
    HorizonTooShort { available: f64, required: f64 },

    #[error("index {index} out of range for {len} particles")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("too few usable samples: {used} of {total}")]
    TooFewSamples { used: usize, total: usize },

    #[error("non-positive value {value} at lag {lag} inside the fit window")]
    NonPositive { lag: f64, value: f64 },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
