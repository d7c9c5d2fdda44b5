use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),

    #[error("invalid chart `{chart}`: {reason}")]
    InvalidChart { chart: String, reason: String },

    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },

    #[error("degree error: {0}")]
    Degree(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),

    #[error("singular symplectic matrix at point {0:?}")]
    Singular(Vec<f64>),

    #[error("empty sample grid on chart `{0}`")]
    EmptyGrid(String),

    #[error("not symplectic: closedness residual {0:e} above tolerance")]
    NotSymplectic(f64),

    #[error("not exact on this chart: loop discrepancy {0:e} above tolerance")]
    NotExact(f64),

    #[error("dominance not reached: no admissible K up to {0}")]
    DominanceNotReached(f64),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("outside the gluing annulus: |x| = {norm} not in ({lower}, {upper})")]
    OutsideAnnulus { norm: f64, lower: f64, upper: f64 },

    #[error("dangling reference in [{section}]: `{name}`")]
    DanglingReference { section: String, name: String },

    #[error("duplicate name in [{section}]: `{name}`")]
    DuplicateName { section: String, name: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
