use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed FCIDUMP at line {line}: {msg}")]
    Fcidump { line: usize, msg: String },

    #[error("core orbital unoccupied in reference (index {0})")]
    CoreUnoccupied(usize),

    #[error("index {index} out of range for {n} spin orbitals")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("sector dimension {dim} exceeds cap {cap}")]
    SectorTooLarge { dim: usize, cap: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("ionized state has zero norm (core occupation {0:e})")]
    ZeroNorm(f64),

    #[error("{what} did not converge after {iterations} iterations (residual norm {residual:e})")]
    NotConverged { what: &'static str, iterations: usize, residual: f64 },

    #[error("degenerate reference: occupied/virtual gap {0:e}")]
    DegenerateReference(f64),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("integrator step failed at t = {time}: step size {step:e} below minimum")]
    StepFailure { time: f64, step: f64 },

    #[error("propagation diverged at t = {time} (amplitude norm {norm:e})")]
    Diverged { time: f64, norm: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("broadening must be positive, got {0}")]
    InvalidEta(f64),

    #[error("quasiparticle fit window is empty")]
    EmptyWindow,

    #[error("spectrum is identically zero")]
    ZeroSpectrum,

    #[error("polynomial degree parity violated: {0}")]
    DegreeParity(String),

    #[error("block-encoding normalization too small: norm estimate {estimate} > alpha {alpha}")]
    AlphaTooSmall { estimate: f64, alpha: f64 },

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{method}: {source}")]
    Method {
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn tagged(self, method: impl Into<String>) -> Error {
        Error::Method { method: method.into(), source: Box::new(self) }
    }
}
