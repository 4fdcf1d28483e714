use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("cannot parse law spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("quadrature failed to reach tolerance: {0}")]
    Quadrature(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("simulation budget exceeded: more than {0} arrivals needed")]
    Budget(u64),

    #[error("time {s} outside [0, {horizon})")]
    Range { s: f64, horizon: f64 },

    #[error("tilted measure base does not match the law")]
    Mismatch,

    #[error("cannot sample the conditional tail beyond {0}")]
    TailSampling(f64),

    #[error("test function is not admissible: C_f = {0} >= 1")]
    NotAdmissible(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
