use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyInput,
    NonFinite,
    InvalidArgument(String),
    SignalTooShort,
    CorruptPyramid,
    NyquistViolation { sample_rate_hz: f64, high_hz: f64 },
    NotNormalized(f64),
    ShapeMismatch(String),
    DegenerateDirection,
    BackwardBeforeForward,
    NoPulsatileAbp,
    RecordTooShort { len: usize, needed: usize },
    UndefinedCorrelation,
    InvalidConfig(String),
    EmptyTrainingSet,
    NumericFailure(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInput => f.write_str("empty input"),
            Error::NonFinite => f.write_str("non-finite sample value"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SignalTooShort => f.write_str("signal too short for 10 levels"),
            Error::CorruptPyramid => f.write_str("corrupt pyramid"),
            Error::NyquistViolation {
                sample_rate_hz,
                high_hz,
            } => write!(
                f,
                "Nyquist violation: {sample_rate_hz} Hz sampling cannot represent a {high_hz} Hz stop band"
            ),
            Error::NotNormalized(x) => write!(f, "input not normalized: |{x}| > 1"),
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::DegenerateDirection => f.write_str("degenerate direction: zero-norm weight vector"),
            Error::BackwardBeforeForward => f.write_str("backward called before forward"),
            Error::NoPulsatileAbp => f.write_str("no pulsatile ABP"),
            Error::RecordTooShort { len, needed } => {
                write!(f, "record too short: {len} samples, need at least {needed}")
            }
            Error::UndefinedCorrelation => f.write_str("undefined correlation: constant series"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::EmptyTrainingSet => f.write_str("empty training set"),
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
