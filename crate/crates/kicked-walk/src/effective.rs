//! Light-shift algebra for realizing the walk with a pulsed standing wave.
//!
//! Driving the two ground levels with opposite detunings gives each arm its
//! own kick strength k_i = Ω²τ_p/(8Δ_i), but also imprints AC-Stark and
//! hyperfine phases between the levels. All of them collapse into a single
//! relative phase
//!
//! ```text
//! Φ = k₁ + k₂ + (Δ₁ + Δ₂)·τ
//! ```
//!
//! so the physical kick is K_eff = K·diag(e^{−iΦ/2}, e^{+iΦ/2}) (global phase
//! dropped). Following it with the phase-gated coin
//!
//! ```text
//! C_eff = C·M(Φ),  M(Φ) = diag(e^{iΦ/2}, e^{−iΦ/2})
//! ```
//!
//! restores the ideal step exactly: C_eff·K_eff = C·K, because the phase gate
//! and the kick band are both diagonal in the internal level. This module
//! provides the scalar formulas, the compensated operators, and a numerical
//! verification of the identity on the truncated momentum basis.

use num_complex::Complex64 as C64;

use crate::error::{Result, WalkError};
use crate::quantum_map::{coin_matrix, KickPlan, StepOperators};

/// Laser-pulse parameters of one walk realization, in lab units except for
/// the dimensionless kick period.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserParams {
    /// Rabi frequency Ω (rad/s).
    pub rabi_frequency: f64,
    /// Pulse duration τ_p (s).
    pub pulse_duration: f64,
    /// Detuning magnitude for the level-1 arm (rad/s, > 0; the opposite sign
    /// of the two arms is structural, not stored).
    pub detuning_1: f64,
    /// Detuning magnitude for the level-2 arm (rad/s, > 0).
    pub detuning_2: f64,
    /// Kick period in the dimensionless walk units.
    pub period: f64,
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.detuning_1 > 0.0 && self.detuning_2 > 0.0) {
            return Err(WalkError::Config(format!(
                "detunings must be positive, got ({}, {})",
                self.detuning_1, self.detuning_2
            )));
        }
        if !(self.pulse_duration > 0.0) || !self.rabi_frequency.is_finite() {
            return Err(WalkError::Config("pulse duration must be > 0 and Ω finite".into()));
        }
        Ok(())
    }

    /// Kick strengths (k₁, k₂) of the two arms.
    pub fn kick_strengths(&self) -> Result<(f64, f64)> {
        self.validate()?;
        Ok((
            kick_strength(self.rabi_frequency, self.pulse_duration, self.detuning_1)?,
            kick_strength(self.rabi_frequency, self.pulse_duration, self.detuning_2)?,
        ))
    }
}

/// Kick strength k = Ω²τ_p/(8Δ) of one arm; the sign of the detuning decides
/// the sign of the kick.
pub fn kick_strength(rabi_frequency: f64, pulse_duration: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 {
        return Err(WalkError::Domain("kick strength diverges at zero detuning".into()));
    }
    Ok(rabi_frequency * rabi_frequency * pulse_duration / (8.0 * detuning))
}

/// Relative light-shift phase Φ = k₁ + k₂ + (Δ₁ + Δ₂)·τ accumulated between
/// the levels over one period. The detunings must already be expressed in the
/// dimensionless unit system of τ (see [`dimensionless_detuning`]); the
/// formula is unit-blind arithmetic beyond that.
pub fn light_shift_phase(k1: f64, k2: f64, detuning_1: f64, detuning_2: f64, tau: f64) -> f64 {
    k1 + k2 + (detuning_1 + detuning_2) * tau
}

/// Unit bridge for [`light_shift_phase`]: converts a physical detuning
/// (rad/s) to the dimensionless unit system where the kick period is `tau`.
///
/// Contract: the returned value times `tau` equals the physical dynamical
/// phase Δ·T accumulated over one real period of `period_seconds`. Callers
/// that already work in dimensionless units skip this.
pub fn dimensionless_detuning(
    detuning_rad_per_s: f64,
    period_seconds: f64,
    tau: f64,
) -> Result<f64> {
    if !(period_seconds > 0.0) || !(tau > 0.0) {
        return Err(WalkError::Config(format!(
            "period and τ must be positive, got ({period_seconds}, {tau})"
        )));
    }
    Ok(detuning_rad_per_s * period_seconds / tau)
}

/// The compensating coin C·M(Φ): the bare balanced coin preceded by the phase
/// gate M(Φ) = diag(e^{iΦ/2}, e^{−iΦ/2}). Unitary for every Φ; Φ = 0 gives
/// the bare coin back.
pub fn effective_coin(phi: f64) -> [[C64; 2]; 2] {
    let plus = C64::from_polar(1.0, phi / 2.0);
    let minus = plus.conj();
    let c = coin_matrix();
    [[c[0][0] * plus, c[0][1] * minus], [c[1][0] * plus, c[1][1] * minus]]
}

/// Per-level scalar phases (e^{−iΦ/2}, e^{+iΦ/2}) the pulse imprints on the
/// kick bands.
pub fn kick_phases(phi: f64) -> (C64, C64) {
    let minus = C64::from_polar(1.0, -phi / 2.0);
    (minus, minus.conj())
}

/// Step operators of the compensated physical walk: effective coin plus
/// phase-laden kick. Feeding these to the simulator must reproduce the ideal
/// walk exactly.
pub fn compensated_operators(phi: f64) -> StepOperators {
    StepOperators { coin: effective_coin(phi), kick_scalar: kick_phases(phi) }
}

/// Builds C_eff·K_eff and C·K on the truncated basis n ∈ [−n_max, n_max]
/// (levels × momentum classes) through the Jacobi–Anger band and returns the
/// largest element-wise deviation. `kick_phase` is the phase the physical
/// pulse imprints; `coin_phase` the one the compensating gate assumes.
/// Matching phases cancel exactly up to rounding; a mismatch δ shows up at
/// the size of |e^{iδ/2} − 1|.
pub fn verify_compensation(k: f64, kick_phase: f64, coin_phase: f64, n_max: i32) -> Result<f64> {
    if n_max < 1 {
        return Err(WalkError::Config(format!("n_max must be ≥ 1, got {n_max}")));
    }
    let ideal = KickPlan::new(k, StepOperators::ideal().kick_scalar)?;
    let effective = KickPlan::new(k, kick_phases(kick_phase))?;
    let c = coin_matrix();
    let c_eff = effective_coin(coin_phase);
    let mut max_dev = 0.0f64;
    // Matrix element ⟨n', ℓ'| C·K |n, ℓ⟩ = C[ℓ'][ℓ]·w_ℓ(n'−n); scan the band.
    for n in -n_max..=n_max {
        let m_lo = (-n_max - n).max(-ideal.m_cut());
        let m_hi = (n_max - n).min(ideal.m_cut());
        for m in m_lo..=m_hi {
            for level_in in 1..=2u8 {
                let w_ideal = ideal.weight(level_in, m);
                let w_eff = effective.weight(level_in, m);
                for level_out in 0..2usize {
                    let col = (level_in - 1) as usize;
                    let dev = (c_eff[level_out][col] * w_eff - c[level_out][col] * w_ideal)
                        .norm();
                    max_dev = max_dev.max(dev);
                }
            }
        }
    }
    Ok(max_dev)
}
