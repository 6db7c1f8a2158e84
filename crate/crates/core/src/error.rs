use thiserror::Error;

use crate::schemes::Regime;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shift {shift} for dimension {q}")]
    InvalidShift { q: usize, shift: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid channel parameters: {0}")]
    Parameter(String),

    #[error("degenerate channel: m = n = 0 has no levels")]
    DegenerateChannel,

    #[error("builder for the {expected} regime called with a {actual} channel")]
    WrongRegime { expected: Regime, actual: Regime },

    #[error("unsupported case in the {regime} regime: {reason}")]
    Unsupported { regime: Regime, reason: String },

    #[error("state space of 2^{bits} source realizations exceeds the bound of {max_states}")]
    CapacityExceeded { bits: usize, max_states: u64 },

    #[error("malformed scheme: {0}")]
    MalformedScheme(String),

    #[error("rank and enumeration verdicts disagree: {0}")]
    InconsistentMethods(String),
}
