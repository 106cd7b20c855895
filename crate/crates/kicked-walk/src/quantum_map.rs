//! Exact truncated evolution of the walk: the ground-truth route.
//!
//! One step applies, in order,
//!
//! ```text
//! K = diag(e^{−ik cosθ}, e^{+ik cosθ})      kick, conditioned on the level
//! C = (1/√2) [[1, i], [i, 1]]               balanced coin
//! F = e^{−iτnβ}   or   e^{−iτ(n+β)²/2}      free evolution (see FreeEvolutionMode)
//! ```
//!
//! In the momentum basis the kick is a banded convolution: by Jacobi–Anger,
//! `e^{−ik cosθ} = Σ_m (−i)^m J_m(k) e^{imθ}` and `e^{imθ}` translates
//! `|n⟩ → |n+m⟩`, so level 1 convolves with `(−i)^m J_m(k)` and level 2 with
//! `(+i)^m J_m(k)`. The band is cut at `m_cut = ⌈|k|⌉ + 25`, far into the
//! exponential tail of J_m; whatever mass still falls off the grid is counted
//! and reported as leakage, never renormalized away.

use num_complex::Complex64 as C64;

use crate::bessel::bessel_row_real;
use crate::config::{FreeEvolutionMode, RatchetSpec, Route, WalkConfig};
use crate::error::{Result, WalkError};
use crate::state::{build_initial_state, distribution_of, MomentumDistribution, SpinorState};

/// i^p for any integer p.
#[inline]
pub(crate) fn i_pow(p: i64) -> C64 {
    match p.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// The balanced coin (1/√2)[[1, i], [i, 1]].
pub fn coin_matrix() -> [[C64; 2]; 2] {
    let w = std::f64::consts::FRAC_1_SQRT_2;
    [
        [C64::new(w, 0.0), C64::new(0.0, w)],
        [C64::new(0.0, w), C64::new(w, 0.0)],
    ]
}

/// Step operators for [`walk_with`]: the ideal walk uses the balanced coin and
/// unit kick scalars; the light-shift test harness substitutes the effective
/// coin and the per-level phases `e^{∓iΦ/2}` that a real pulse imprints.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOperators {
    pub coin: [[C64; 2]; 2],
    /// Scalar multiplying the level-1 / level-2 kick band.
    pub kick_scalar: (C64, C64),
}

impl StepOperators {
    pub fn ideal() -> Self {
        Self { coin: coin_matrix(), kick_scalar: (C64::new(1.0, 0.0), C64::new(1.0, 0.0)) }
    }
}

impl Default for StepOperators {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Precomputed kick band `w_ℓ(m)` for `m ∈ [−m_cut, m_cut]`.
#[derive(Debug, Clone)]
pub struct KickPlan {
    m_cut: i32,
    w1: Vec<C64>,
    w2: Vec<C64>,
}

impl KickPlan {
    /// Band weights for kick strength `k`, optionally scaled per level.
    pub fn new(k: f64, scalar: (C64, C64)) -> Result<Self> {
        let m_cut = k.abs().ceil() as i32 + 25;
        let j = bessel_row_real(k, -m_cut, m_cut)?;
        let mut w1 = Vec::with_capacity(j.len());
        let mut w2 = Vec::with_capacity(j.len());
        for (i, &jm) in j.iter().enumerate() {
            let m = i as i64 - m_cut as i64;
            w1.push(scalar.0 * i_pow(-m) * jm); // (−i)^m = i^{−m}
            w2.push(scalar.1 * i_pow(m) * jm);
        }
        Ok(Self { m_cut, w1, w2 })
    }

    pub fn m_cut(&self) -> i32 {
        self.m_cut
    }

    /// Band weight for one level (`level ∈ {1,2}`), order m.
    pub fn weight(&self, level: u8, m: i32) -> C64 {
        assert!(m.abs() <= self.m_cut);
        let i = (m + self.m_cut) as usize;
        match level {
            1 => self.w1[i],
            2 => self.w2[i],
            _ => panic!("level must be 1 or 2"),
        }
    }
}

fn convolve_level(amps: &[C64], band: &[C64], m_cut: i32) -> Vec<C64> {
    let len = amps.len();
    let mut out = vec![C64::ZERO; len];
    for (idx, value) in out.iter_mut().enumerate() {
        // new(n) = Σ_m w(m) · old(n − m)
        let mut acc = C64::ZERO;
        let lo = (-m_cut).max(idx as i32 - (len as i32 - 1));
        let hi = m_cut.min(idx as i32);
        for m in lo..=hi {
            acc += band[(m + m_cut) as usize] * amps[(idx as i32 - m) as usize];
        }
        *value = acc;
    }
    out
}

/// Apply one kick in place. Returns the probability that left the grid (also
/// counting the sub-1e−14 band-truncation deficit); errors when it exceeds
/// `leakage_tol`.
pub fn apply_kick(state: &mut SpinorState, plan: &KickPlan, leakage_tol: f64) -> Result<f64> {
    let before = state.norm_sq();
    let a1 = convolve_level(&state.a1, &plan.w1, plan.m_cut);
    let a2 = convolve_level(&state.a2, &plan.w2, plan.m_cut);
    state.a1 = a1;
    state.a2 = a2;
    let leakage = (before - state.norm_sq()).max(0.0);
    if leakage > leakage_tol {
        return Err(WalkError::Truncation { leakage, tolerance: leakage_tol });
    }
    Ok(leakage)
}

/// Apply a 2×2 internal-level unitary per momentum class, in place.
pub fn apply_coin(state: &mut SpinorState, coin: &[[C64; 2]; 2]) {
    for (a1, a2) in state.a1.iter_mut().zip(state.a2.iter_mut()) {
        let b1 = coin[0][0] * *a1 + coin[0][1] * *a2;
        let b2 = coin[1][0] * *a1 + coin[1][1] * *a2;
        *a1 = b1;
        *a2 = b2;
    }
}

/// Apply the free-evolution phases of one period, in place.
pub fn apply_free(state: &mut SpinorState, config: &WalkConfig) {
    let n_max = state.n_max();
    for i in 0..state.len() {
        let n = i as i32 - n_max;
        let phase = match config.free_mode {
            FreeEvolutionMode::Simplified => -config.tau * n as f64 * config.beta,
            FreeEvolutionMode::Full => {
                let p = n as f64 + config.beta;
                -0.5 * config.tau * p * p
            }
        };
        let f = C64::from_polar(1.0, phase);
        state.a1[i] *= f;
        state.a2[i] *= f;
    }
}

/// Run `T` steps of the ideal walk and read out the distribution.
pub fn walk(config: &WalkConfig, ratchet: &RatchetSpec) -> Result<MomentumDistribution> {
    walk_with(config, ratchet, &StepOperators::ideal())
}

/// Same, with substituted step operators (see [`StepOperators`]).
pub fn walk_with(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
    ops: &StepOperators,
) -> Result<MomentumDistribution> {
    let state = walk_state(config, ratchet, ops)?;
    Ok(distribution_of(&state, Route::Simulation, config, ratchet))
}

/// The evolved spinor state itself, for callers that need amplitudes.
pub fn walk_state(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
    ops: &StepOperators,
) -> Result<SpinorState> {
    let mut state = build_initial_state(config, ratchet)?;
    let plan = KickPlan::new(config.k, ops.kick_scalar)?;
    for _ in 0..config.steps {
        apply_kick(&mut state, &plan, config.leakage_tol)?;
        apply_coin(&mut state, &ops.coin);
        apply_free(&mut state, config);
    }
    Ok(state)
}
