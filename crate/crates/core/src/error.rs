use alloc::string::String;
use core::fmt;

use crate::history::EventKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the estimation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    NegativeTime { subject: u64, time: f64 },
    BeyondHorizon { subject: u64, time: f64, horizon: f64 },
    InvalidHorizon(f64),
    DuplicateEvent { subject: u64, kind: EventKind },
    EventAfterExit { subject: u64, time: f64, exit: f64 },
    PayloadArity { subject: u64, expected: usize, found: usize },
    BaselineArity { subject: u64, expected: usize, found: usize },
    UnknownSubject(u64),
    UnknownColumn(String),
    NonFiniteWeight { subject: u64, time: f64 },
    MismatchedSubjects,
    /// A ratio of densities or intensities had a zero denominator.
    Positivity { subject: u64, time: f64 },
    InvalidParameter(&'static str),
    BindingMismatch { expected: usize, found: usize },
    NonFiniteState { time: f64 },
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NegativeTime { subject, time } => {
                write!(f, "subject {subject}: negative event time {time}")
            }
            Error::BeyondHorizon { subject, time, horizon } => {
                write!(f, "subject {subject}: event time {time} beyond horizon {horizon}")
            }
            Error::InvalidHorizon(h) => write!(f, "horizon must be positive and finite, got {h}"),
            Error::DuplicateEvent { subject, kind } => {
                write!(f, "subject {subject}: more than one {kind} event")
            }
            Error::EventAfterExit { subject, time, exit } => write!(
                f,
                "subject {subject}: event at {time} after leaving the study at {exit}"
            ),
            Error::PayloadArity { subject, expected, found } => write!(
                f,
                "subject {subject}: payload has {found} values, expected {expected}"
            ),
            Error::BaselineArity { subject, expected, found } => write!(
                f,
                "subject {subject}: baseline row has {found} values, expected {expected}"
            ),
            Error::UnknownSubject(id) => write!(f, "unknown subject {id}"),
            Error::UnknownColumn(name) => write!(f, "unknown design column `{name}`"),
            Error::NonFiniteWeight { subject, time } => {
                write!(f, "subject {subject}: non-finite weight at {time}")
            }
            Error::MismatchedSubjects => write!(f, "weight sets cover different subjects"),
            Error::Positivity { subject, time } => write!(
                f,
                "subject {subject}: positivity violation (zero denominator) at {time}"
            ),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::BindingMismatch { expected, found } => write!(
                f,
                "integrator binding mismatch: spec needs {expected} hazard columns, got {found}"
            ),
            Error::NonFiniteState { time } => write!(f, "non-finite ODE state at time {time}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
