//! Crate-wide error with a coarse kind that fixes process exit codes.

use std::fmt;

use crate::bounds::BoundsError;
use crate::constraint::ConstraintError;
use crate::encoder::{EncoderError, InvalidEncoder};
use crate::tune::TuneError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(i32)]
pub enum ErrorKind {
    /// Unreadable or malformed input, or bad arguments.
    Parse = 2,
    /// Input parsed but is not a valid encoder, geometry or array.
    Validation = 3,
    SizeCap = 4,
    Solver = 5,
}

impl ErrorKind {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct Error {
    pub kind: ErrorKind,
    pub message: String,
}

impl Error {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Error { kind, message: message.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::new(ErrorKind::Parse, e.to_string())
    }
}

impl From<ConstraintError> for Error {
    fn from(e: ConstraintError) -> Self {
        Error::new(ErrorKind::Parse, e.to_string())
    }
}

impl From<InvalidEncoder> for Error {
    fn from(e: InvalidEncoder) -> Self {
        Error::new(ErrorKind::Validation, format!("invalid encoder: {e}"))
    }
}

impl From<EncoderError> for Error {
    fn from(e: EncoderError) -> Self {
        let kind = match e {
            EncoderError::Parse { .. } | EncoderError::BadDimensions { .. } | EncoderError::BadWindow => ErrorKind::Parse,
            EncoderError::TooManyOutcomes(_) => ErrorKind::SizeCap,
            _ => ErrorKind::Validation,
        };
        Error::new(kind, e.to_string())
    }
}

impl From<BoundsError> for Error {
    fn from(e: BoundsError) -> Self {
        let kind = match e {
            BoundsError::SizeCap { .. } => ErrorKind::SizeCap,
            BoundsError::Solver { .. } | BoundsError::Lp(_) | BoundsError::SupportChanged(_) => ErrorKind::Solver,
            BoundsError::BadRelaxation => ErrorKind::Parse,
            _ => ErrorKind::Validation,
        };
        Error::new(kind, e.to_string())
    }
}

impl From<TuneError> for Error {
    fn from(e: TuneError) -> Self {
        match e {
            TuneError::Bounds(b) => b.into(),
            TuneError::Invalid(i) => i.into(),
            other => Error::new(ErrorKind::Parse, other.to_string()),
        }
    }
}
