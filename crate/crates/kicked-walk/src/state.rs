//! Spinor states on the truncated momentum grid and the distributions
//! extracted from them.

use num_complex::Complex64 as C64;

use crate::config::{RatchetSpec, Route, WalkConfig};
use crate::error::{Result, WalkError};

/// Two-level wavefunction over momentum classes `n ∈ [−n_max, n_max]`, stored
/// densely with offset indexing (`index = n + n_max`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorState {
    n_max: i32,
    /// Level-1 amplitudes.
    pub a1: Vec<C64>,
    /// Level-2 amplitudes.
    pub a2: Vec<C64>,
}

impl SpinorState {
    pub fn zero(n_max: i32) -> Self {
        let len = (2 * n_max + 1) as usize;
        Self { n_max, a1: vec![C64::ZERO; len], a2: vec![C64::ZERO; len] }
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.a1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a1.is_empty()
    }

    #[inline]
    pub fn index_of(&self, n: i32) -> usize {
        debug_assert!(n.abs() <= self.n_max);
        (n + self.n_max) as usize
    }

    /// Amplitude ⟨n, level|ψ⟩ with `level ∈ {1, 2}`.
    pub fn amp(&self, level: u8, n: i32) -> C64 {
        let i = self.index_of(n);
        match level {
            1 => self.a1[i],
            2 => self.a2[i],
            _ => panic!("level must be 1 or 2, got {level}"),
        }
    }

    /// Total norm² over both levels.
    pub fn norm_sq(&self) -> f64 {
        let s1: f64 = self.a1.iter().map(|a| a.norm_sqr()).sum();
        let s2: f64 = self.a2.iter().map(|a| a.norm_sqr()).sum();
        s1 + s2
    }

    /// Momentum classes of the grid, in index order.
    pub fn grid(&self) -> impl Iterator<Item = i32> + '_ {
        -self.n_max..=self.n_max
    }
}

/// Build the ratchet initial state `amplitude(ℓ, s) = b_ℓ · exp(−isφ) / √S`.
///
/// Errors if any class falls outside the (resolved) grid or the inputs fail
/// validation; the returned state has unit norm to machine precision.
pub fn build_initial_state(config: &WalkConfig, ratchet: &RatchetSpec) -> Result<SpinorState> {
    config.validate()?;
    ratchet.validate()?;
    let n_max = config.resolved_n_max(ratchet);
    for &s in &ratchet.classes {
        if s.abs() > n_max {
            return Err(WalkError::Config(format!(
                "ratchet class {s} outside momentum grid ±{n_max}"
            )));
        }
    }
    let mut state = SpinorState::zero(n_max);
    let inv_sqrt_s = 1.0 / (ratchet.class_count() as f64).sqrt();
    let (b1, b2) = ratchet.weights;
    for &s in &ratchet.classes {
        let ladder = C64::from_polar(inv_sqrt_s, -(s as f64) * ratchet.phase);
        let i = state.index_of(s);
        state.a1[i] = b1 * ladder;
        state.a2[i] = b2 * ladder;
    }
    Ok(state)
}

/// Momentum distribution over the grid, per level and total, tagged with the
/// route and configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    n_max: i32,
    /// P₁(n) = |⟨n, 1|ψ⟩|².
    pub p1: Vec<f64>,
    /// P₂(n) = |⟨n, 2|ψ⟩|².
    pub p2: Vec<f64>,
    pub route: Route,
    /// Configuration echo for provenance.
    pub config: WalkConfig,
    pub ratchet: RatchetSpec,
}

impl MomentumDistribution {
    pub fn from_parts(
        n_max: i32,
        p1: Vec<f64>,
        p2: Vec<f64>,
        route: Route,
        config: &WalkConfig,
        ratchet: &RatchetSpec,
    ) -> Self {
        assert_eq!(p1.len(), (2 * n_max + 1) as usize);
        assert_eq!(p1.len(), p2.len());
        Self { n_max, p1, p2, route, config: config.clone(), ratchet: ratchet.clone() }
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.p1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p1.is_empty()
    }

    #[inline]
    pub fn index_of(&self, n: i32) -> usize {
        (n + self.n_max) as usize
    }

    pub fn grid(&self) -> impl Iterator<Item = i32> + '_ {
        -self.n_max..=self.n_max
    }

    /// Total probability P(n) = P₁(n) + P₂(n).
    pub fn p_total(&self, n: i32) -> f64 {
        let i = self.index_of(n);
        self.p1[i] + self.p2[i]
    }

    /// Total probabilities in grid order.
    pub fn totals(&self) -> Vec<f64> {
        self.p1.iter().zip(&self.p2).map(|(a, b)| a + b).collect()
    }

    /// Σ_n P(n); 1 up to leakage for anything this crate produces.
    pub fn mass(&self) -> f64 {
        self.p1.iter().sum::<f64>() + self.p2.iter().sum::<f64>()
    }

    /// Largest |P(n) − other.P(n)| over the common grid; errors when the
    /// grids differ.
    pub fn max_norm_distance(&self, other: &Self) -> Result<f64> {
        if self.n_max != other.n_max {
            return Err(WalkError::Domain(format!(
                "grid mismatch: ±{} vs ±{}",
                self.n_max, other.n_max
            )));
        }
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            let d = ((self.p1[i] + self.p2[i]) - (other.p1[i] + other.p2[i])).abs();
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// Read the distribution off a state.
pub fn distribution_of(
    state: &SpinorState,
    route: Route,
    config: &WalkConfig,
    ratchet: &RatchetSpec,
) -> MomentumDistribution {
    let p1 = state.a1.iter().map(|a| a.norm_sqr()).collect();
    let p2 = state.a2.iter().map(|a| a.norm_sqr()).collect();
    MomentumDistribution::from_parts(state.n_max(), p1, p2, route, config, ratchet)
}
