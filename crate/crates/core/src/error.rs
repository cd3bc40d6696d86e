use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("cannot parse {0:?} as a scalar")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("{text:?} is not an element of F_{modulus} (denominator divisible by p)")]
    NotInField { text: String, modulus: u64 },
    #[error("invalid field modulus {0}: must be an odd prime below 2^63")]
    InvalidModulus(u64),
    #[error("invalid field spec {0:?}")]
    InvalidFieldSpec(String),
    #[error("affine map slope must be nonzero")]
    ZeroSlope,
    #[error("sets live over different fields")]
    FieldMismatch,
    #[error("brute-force oracle refused |A| = {size} (cap {cap})")]
    OracleCapExceeded { size: usize, cap: usize },
    #[error("slice constant C must be nonzero")]
    ZeroC,
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("need at least two lines, got {0}")]
    TooFewLines(usize),
    #[error("line meets the point set at {0}")]
    LineMeetsP(String),
    #[error("the two lines are equal")]
    EqualLines,
    #[error("point {0} lies on the y-axis")]
    PointOnYAxis(String),
    #[error("point {0} is not an affine point")]
    NotAffine(String),
    #[error("degenerate projective data: {0}")]
    Degenerate(String),
    #[error("invalid generator spec {0:?}: {1}")]
    InvalidSpec(String, String),
    #[error("cannot draw {requested} distinct elements from a pool of {available}")]
    CannotFill { requested: u128, available: u128 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OracleMismatch(_) => 3,
            Error::InvariantViolation(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
