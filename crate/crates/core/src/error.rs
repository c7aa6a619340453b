use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NonUnitary { residual: f64 },

    #[error("matrix is defective: eigenvectors are parallel")]
    Defective,

    #[error("invalid coin jet: {0}")]
    InvalidJet(String),

    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid rational `{0}`")]
    InvalidRational(String),

    #[error("exponent {name} = {value} outside {range}")]
    ExponentOutOfRange {
        name: &'static str,
        value: String,
        range: &'static str,
    },

    #[error("constraint `{constraint}` violated (residual {residual:.3e})")]
    NonCompliant { constraint: String, residual: f64 },

    #[error("expected {expected} mode")]
    ModeMismatch { expected: &'static str },

    #[error("scaling a = 0 is the continuous-time limit; use the limits module")]
    TimeScaling,

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("error values must be positive for a log-log fit; agreement is below the floating floor")]
    BelowFloatingFloor,

    #[error("field dimensions {nx}x{ny} invalid: {reason}")]
    Shape { nx: usize, ny: usize, reason: &'static str },

    #[error("malformed field data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
