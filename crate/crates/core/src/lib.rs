//! Secure transmission over the 2-user symmetric linear deterministic
//! interference channel with rate-limited transmitter cooperation.
//!
//! * [`gf2`]: packed GF(2) vectors and matrices.
//! * [`channel`]: the deterministic channel and the Gaussian parameter map.
//! * [`schemes`]: per-regime encoders as generator matrices.
//! * [`analysis`]: exact secrecy and decodability checks.
//! * [`rates`]: closed-form achievable rates and sweeps over `C`.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod gf2;
pub mod rates;
pub mod schemes;

pub use analysis::{verify, verify_with, Bits, Method, VerificationReport, DEFAULT_MAX_STATES};
pub use channel::{from_gaussian, ChannelParams, GaussianParams};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use rates::{formula_rate, sweep, RatePoint};
pub use schemes::{build, classify_regime, RateResult, Regime, SchemeDescription};
