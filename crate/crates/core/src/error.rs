use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A mathematical precondition failed (argument out of domain).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates the invariant of the type it belongs to.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The caller broke an API contract (missing state, dimension mismatch, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "quadrature missed tolerance {tol:e} after {subdivisions} subdivisions \
         (best estimate {estimate}, estimated error {error:e})"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        tol: f64,
        subdivisions: usize,
    },

    #[error("orbit left the divergence guard at step {step} of chain {chain} (|x| = {norm:e})")]
    Divergence {
        chain: usize,
        step: usize,
        norm: f64,
    },

    #[error("{count} points exceed the materialization cap of {cap}")]
    CapExceeded { count: u128, cap: u64 },

    #[error("Hankel integral still moving at beta = {limit} (last increment {increment:e})")]
    HankelCutoff { limit: f64, increment: f64 },

    #[error("stationary law is singular; no pointwise density exists")]
    SingularLaw,

    #[error("grid error: {0}")]
    Grid(String),

    #[error("i/o error: {0}")]
    Io(String),

    /// Malformed input file or unserializable value.
    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
