//! Discrete-time quantum walks of kicked two-level atoms in momentum space.
//!
//! A two-level atom in a pulsed optical lattice realizes a quantum walk: each
//! step kicks the atom with a potential `±k cosθ` whose sign is conditioned on
//! the internal level, mixes the levels with a balanced coin, and applies the
//! free evolution of one lattice period. Starting from a ratchet state (a
//! phase-laddered superposition of a few momentum classes), the probability
//! spreads ballistically over the momentum classes `p = n + β`.
//!
//! The crate computes the momentum distribution `P(n; T)` after `T` steps by
//! three independent routes and cross-checks them against each other:
//!
//! * [`quantum_map`] — exact truncated evolution (Jacobi–Anger kick
//!   convolution, coin, free phases); the ground truth for everything else.
//! * [`resonant`] — closed form at quantum resonance (τ = 4π, β = 0) from
//!   integer coefficient tables obeying a Dickson-polynomial recursion.
//! * [`near_resonant`] — a Bessel path sum over the 2^T coin histories,
//!   valid for small quasimomentum β.
//!
//! Around these sit [`effective`] (light-shift phase and the compensating
//! coin), [`ensemble`] (deterministic quasimomentum averaging),
//! [`observables`] (moments, peaks, distances, ballistic fits) and the shared
//! [`bessel`] evaluator.

pub mod bessel;
pub mod config;
pub mod effective;
pub mod ensemble;
pub mod error;
pub mod near_resonant;
pub mod observables;
pub mod quantum_map;
pub mod resonant;
pub mod state;
pub mod tolerances;

pub use config::{FreeEvolutionMode, RatchetSpec, Route, WalkConfig, RESONANT_PERIOD};
pub use error::{Result, WalkError};
pub use state::{build_initial_state, distribution_of, MomentumDistribution, SpinorState};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
