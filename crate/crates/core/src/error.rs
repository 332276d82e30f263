use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("local design matrix is numerically singular at t = {t} (bandwidth {bandwidth} too small?)")]
    SingularDesign { t: f64, bandwidth: f64 },

    #[error("every candidate bandwidth produced a singular local design")]
    AllCandidatesSingular,

    #[error("weight window [a+eta, b-eta] is empty: a = {a_hat}, b = {b_hat}, eta = {eta}")]
    DegenerateWindow { a_hat: f64, b_hat: f64, eta: f64 },

    #[error("horizontal shift estimate {c_hat} is outside the admissible range")]
    ShiftOutOfRange { c_hat: f64 },

    #[error("block size {m} exceeds n/4 for n = {n}")]
    BlockTooLarge { m: usize, n: usize },

    #[error("second derivative {value} at u = {u} is not bounded away from zero")]
    NonConvex { u: f64, value: f64 },

    #[error("{0} has {1} observations; at least 10 are required")]
    TooFewRows(String, usize),

    #[error("{path}:{line}: cannot parse {field:?} as a number")]
    Parse { path: String, line: u64, field: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable identifier, used in JSON error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SingularDesign { .. } => "SingularDesign",
            Error::AllCandidatesSingular => "AllCandidatesSingular",
            Error::DegenerateWindow { .. } => "DegenerateWindow",
            Error::ShiftOutOfRange { .. } => "ShiftOutOfRange",
            Error::BlockTooLarge { .. } => "BlockTooLarge",
            Error::NonConvex { .. } => "NonConvex",
            Error::TooFewRows(..) => "TooFewRows",
            Error::Parse { .. } => "ParseError",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Io(_) => "IoError",
            Error::Config(_) => "ConfigError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
