//! Run configuration: kick parameters, free-evolution convention, and the
//! ratchet initial state.
//!
//! The walk acts on a two-level atom whose momentum is discretized into
//! classes `p = n + β` with integer `n` and conserved quasimomentum `β`. One
//! step is `U_β = F · C · K`: kick, coin, free evolution. All routes in this
//! crate consume the same [`WalkConfig`] / [`RatchetSpec`] pair so their
//! outputs are directly comparable.

use crate::error::{Result, WalkError};
use crate::tolerances::LEAKAGE_TOL_DEFAULT;

/// Resonant kicking period τ = 4π, the main quantum resonance.
pub const RESONANT_PERIOD: f64 = 4.0 * std::f64::consts::PI;

/// How the free-evolution phase between kicks is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreeEvolutionMode {
    /// `exp(−iτnβ)` per class: the gauge used by the analytic routes. At
    /// τ = 4π the discarded `exp(−iτn²/2)` factor is exactly 1 and the
    /// remaining `exp(−iτβ²/2)` is a global phase, so distributions match
    /// [`FreeEvolutionMode::Full`] identically at resonance.
    #[default]
    Simplified,
    /// `exp(−iτ(n+β)²/2)` per class: the full one-period propagator.
    Full,
}

/// Which computational route produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Exact truncated quantum map (kick convolution, coin, free phases).
    Simulation,
    /// Closed form at β = 0 built from Dickson-style coefficient tables.
    Resonant,
    /// Bessel path sum over coin histories, valid for small β.
    NearResonant,
}

impl Route {
    pub fn tag(self) -> &'static str {
        match self {
            Route::Simulation => "SIMULATION",
            Route::Resonant => "RESONANT",
            Route::NearResonant => "NEAR_RESONANT",
        }
    }
}

/// Parameters of one walk run.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    /// Kick strength k (dimensionless lattice depth × pulse area).
    pub k: f64,
    /// Kicking period τ; defaults to the quantum resonance 4π.
    pub tau: f64,
    /// Quasimomentum β ∈ (−0.5, 0.5]; conserved during the walk.
    pub beta: f64,
    /// Number of steps T.
    pub steps: u32,
    /// Half-width of the momentum grid `n ∈ [−n_max, n_max]`. `None` picks
    /// `max|class| + ceil(|k|·(T+1)) + 20`, which keeps leakage far below
    /// [`LEAKAGE_TOL_DEFAULT`] (the kick moves ≲ |k| classes per step).
    pub n_max: Option<i32>,
    pub free_mode: FreeEvolutionMode,
    /// Hard cap on probability leaked off the grid (see [`WalkError::Truncation`]).
    pub leakage_tol: f64,
}

impl WalkConfig {
    /// Resonant-period configuration with β = 0 and automatic grid sizing.
    pub fn new(k: f64, steps: u32) -> Self {
        Self {
            k,
            tau: RESONANT_PERIOD,
            beta: 0.0,
            steps,
            n_max: None,
            free_mode: FreeEvolutionMode::default(),
            leakage_tol: LEAKAGE_TOL_DEFAULT,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_steps(mut self, steps: u32) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_n_max(mut self, n_max: i32) -> Self {
        self.n_max = Some(n_max);
        self
    }

    pub fn with_free_mode(mut self, mode: FreeEvolutionMode) -> Self {
        self.free_mode = mode;
        self
    }

    /// Grid half-width actually used for `ratchet`, applying the default rule
    /// when `n_max` is unset.
    pub fn resolved_n_max(&self, ratchet: &RatchetSpec) -> i32 {
        self.n_max.unwrap_or_else(|| {
            let class_reach = ratchet.classes.iter().map(|s| s.abs()).max().unwrap_or(0);
            let kick_reach = (self.k.abs() * (self.steps as f64 + 1.0)).ceil() as i32;
            class_reach + kick_reach + 20
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(WalkError::Config(format!("kick strength k = {} not finite", self.k)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(WalkError::Config(format!("period tau = {} must be positive", self.tau)));
        }
        if !self.beta.is_finite() || self.beta.abs() > 0.5 {
            return Err(WalkError::Config(format!(
                "quasimomentum beta = {} outside (−0.5, 0.5]",
                self.beta
            )));
        }
        if let Some(n_max) = self.n_max {
            if n_max < 1 {
                return Err(WalkError::Config(format!("n_max = {n_max} must be ≥ 1")));
            }
        }
        if !(self.leakage_tol.is_finite() && self.leakage_tol > 0.0) {
            return Err(WalkError::Config(format!(
                "leakage tolerance {} must be positive",
                self.leakage_tol
            )));
        }
        Ok(())
    }
}

/// Initial ratchet state: a uniform superposition of `S` momentum classes
/// with a linear phase ladder, on each internal level.
///
/// ```text
/// |Ψ⟩ = (b₁|1⟩ + b₂|2⟩) ⊗ (1/√S) Σ_s exp(−i s φ) |n = s⟩
/// ```
///
/// The default ladder phase φ = π/2 reproduces the standard ratchet
/// `exp(−isπ/2)`; the analytic routes require exactly this value, while the
/// quantum map accepts any φ (used to scan the directed-current law
/// Δ⟨p⟩ = −(k/2)·sin φ on the level-2 arm).
#[derive(Debug, Clone, PartialEq)]
pub struct RatchetSpec {
    /// Momentum classes `s` in the superposition (distinct integers).
    pub classes: Vec<i32>,
    /// Internal-level weights (b₁, b₂) with b₁² + b₂² = 1.
    pub weights: (f64, f64),
    /// Ladder phase φ in `exp(−i s φ)`.
    pub phase: f64,
}

impl RatchetSpec {
    /// Equal-weight two-level ratchet over the given classes, φ = π/2.
    pub fn symmetric(classes: &[i32]) -> Self {
        let b = std::f64::consts::FRAC_1_SQRT_2;
        Self { classes: classes.to_vec(), weights: (b, b), phase: std::f64::consts::FRAC_PI_2 }
    }

    pub fn with_weights(mut self, b1: f64, b2: f64) -> Self {
        self.weights = (b1, b2);
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Number of superposed classes S.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// True when the ladder phase is the standard π/2 required by the
    /// analytic routes.
    pub fn has_standard_phase(&self) -> bool {
        self.phase == std::f64::consts::FRAC_PI_2
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(WalkError::Config("ratchet needs at least one momentum class".into()));
        }
        let mut seen = self.classes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.classes.len() {
            return Err(WalkError::Config(format!(
                "ratchet classes {:?} contain duplicates",
                self.classes
            )));
        }
        let (b1, b2) = self.weights;
        if !b1.is_finite() || !b2.is_finite() {
            return Err(WalkError::Config("level weights must be finite".into()));
        }
        let norm = b1 * b1 + b2 * b2;
        if (norm - 1.0).abs() > 1e-12 {
            return Err(WalkError::Config(format!(
                "level weights ({b1}, {b2}) have norm² = {norm}, expected 1 within 1e-12"
            )));
        }
        if !self.phase.is_finite() {
            return Err(WalkError::Config("ladder phase must be finite".into()));
        }
        Ok(())
    }
}

impl Default for RatchetSpec {
    fn default() -> Self {
        Self::symmetric(&[0, 1])
    }
}
