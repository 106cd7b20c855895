//! Error taxonomy shared by every route.
//!
//! The split mirrors how callers should react:
//!
//! * [`WalkError::Config`] — the requested run is malformed (bad weights, empty
//!   ratchet, non-positive period, …). Fix the input.
//! * [`WalkError::Domain`] — the input is well-formed but outside the validity
//!   domain of the *chosen* route (e.g. a resonant closed form asked to handle
//!   β ≠ 0). Pick another route.
//! * [`WalkError::BesselRange`] — a Bessel argument left the supported disc
//!   (see `tolerances::BESSEL_MAX_ARG`); the kick strength / step count
//!   combination is too large.
//! * [`WalkError::Truncation`] — probability leaked off the momentum grid past
//!   the configured tolerance. The state is *not* renormalized; enlarge the
//!   grid instead.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum WalkError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("outside route validity: {0}")]
    Domain(String),

    #[error("Bessel argument |z| = {abs:.3} exceeds supported maximum {max}")]
    BesselRange { abs: f64, max: f64 },

    #[error(
        "probability leakage {leakage:.3e} exceeds tolerance {tolerance:.3e}; \
         enlarge the momentum cutoff instead of renormalizing"
    )]
    Truncation { leakage: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, WalkError>;
