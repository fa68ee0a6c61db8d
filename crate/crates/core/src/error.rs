use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Verification failures are never errors: they are recorded as data in
/// reports. These variants cover invalid inputs and unmet preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {tau} exceeds the trusted domain (max {max})")]
    DomainExceeded { tau: f64, max: f64 },

    #[error("value {y} lies outside the range of the Orlicz function (max {max})")]
    OutOfRange { y: f64, max: f64 },

    #[error("Orlicz function is not convex on the sample set and convexification is disabled")]
    NonConvex,

    #[error("dyadic level {level} does not divide {points} points per axis")]
    IndivisibleLevel { level: u32, points: usize },

    #[error("slice height {t} is not a whole multiple of the grid step {h}")]
    IncompatibleTiling { t: f64, h: f64 },

    #[error("support lies {margin} from the box boundary, which is closer than the slice height {t}")]
    SupportTooCloseToBoundary { margin: f64, t: f64 },

    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    #[error("test function has vanishing integral")]
    ZeroIntegralTestFunction,

    #[error("insufficient frequency resolution: {0}")]
    InsufficientResolution(String),

    #[error("unsupported dimension {0}; only 1 and 2 are implemented")]
    UnsupportedDimension(usize),

    #[error("the maximal function has no dynamic range to decompose")]
    EmptyLevelRange,

    #[error("cube holds {points} grid points but {constraints} moment constraints are required")]
    DegenerateCube { points: usize, constraints: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameters outside the admissible window: {0}")]
    ParameterWindow(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
