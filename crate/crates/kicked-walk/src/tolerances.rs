//! Numerical tolerances used across the crate, with the reasoning attached.
//!
//! Every bound below is either a hard contract of the public API or the pinned
//! value used by the cross-route verification suite. Tests reference these
//! constants instead of re-inventing magic numbers.

/// Largest Bessel argument magnitude the evaluator accepts.
///
/// Backward recurrence with the Jacobi–Anger normalization is accurate and
/// fast on this disc. The analytic routes stay below |k|·T ≤ 64 before the
/// enumeration caps kick in; the extra headroom exists for the simulator,
/// which is also asked about strong kicks (k ∼ 100) that wash the walk out.
pub const BESSEL_MAX_ARG: f64 = 128.0;

/// Relative accuracy target for a single Bessel value (away from its zeros).
pub const BESSEL_REL_TOL: f64 = 1e-12;

/// Default cap on probability lost off the edge of the momentum grid during
/// one walk. Exceeding it is a hard error: the state is never silently
/// renormalized, because leakage also distorts the distribution shape.
pub const LEAKAGE_TOL_DEFAULT: f64 = 1e-10;

/// Normalization slack accepted by moment-taking observables. Distributions
/// produced by this crate stay within `LEAKAGE_TOL_DEFAULT` of unit mass, so
/// anything worse than this means the caller assembled the input by hand.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Bound for identities that hold exactly in algebra and are only limited by
/// rounding: coin unitarity, light-shift compensation, phase-ladder checks.
pub const EXACT_ALGEBRA_TOL: f64 = 1e-12;

/// Max-norm agreement demanded between independent routes evaluated at the
/// same resonant configuration (exact map vs. closed form vs. path sum).
pub const CROSS_ROUTE_TOL: f64 = 1e-10;

/// Validity budget for the near-resonant expansion: the quasimomentum spread
/// (FWHM, in units of the momentum-class spacing) times the step count should
/// stay below this fraction before the stationary-phase approximation
/// visibly degrades.
pub const VALIDITY_BUDGET: f64 = 0.10;
