use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The summation range ⌈na⌉..=⌊nb⌋−r is empty.
    #[error("invalid index range: k_min = {k_min} > k_max = {k_max} (n = {n}, r = {r}, interval [{a}, {b}])")]
    InvalidRange {
        k_min: i64,
        k_max: i64,
        n: u32,
        r: u32,
        a: f64,
        b: f64,
    },

    #[error("Steklov range [{lo}, {hi}] leaves the domain [{a}, {b}]")]
    DomainViolation { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("order r = {r} exceeds the supported maximum {max}")]
    OrderTooLarge { r: u32, max: u32 },

    #[error("the rate estimate requires r > 1 (got r = {r})")]
    OrderOutOfScope { r: u32 },

    #[error(
        "tail sum did not converge below {tol:e} after {doublings} doublings (radius {radius})"
    )]
    NonConvergentTail {
        tol: f64,
        doublings: u32,
        radius: u64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("abscissae must be strictly increasing (row {row})")]
    NonMonotoneAbscissae { row: usize },

    #[error("sampled function needs at least 2 rows, got {0}")]
    TooFewPoints(usize),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRange { .. } => "InvalidRange",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::OrderTooLarge { .. } => "OrderTooLarge",
            Error::OrderOutOfScope { .. } => "OrderOutOfScope",
            Error::NonConvergentTail { .. } => "NonConvergentTail",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::UnknownKernel(_) => "UnknownKernel",
            Error::UnknownFunction(_) => "UnknownFunction",
            Error::Parse(_) => "ParseError",
            Error::NonMonotoneAbscissae { .. } => "NonMonotoneAbscissae",
            Error::TooFewPoints(_) => "TooFewPoints",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
