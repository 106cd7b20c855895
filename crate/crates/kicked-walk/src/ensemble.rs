//! Gaussian quasimomentum ensembles and incoherent averaging.
//!
//! A condensate is not a single plane wave: its quasimomenta follow a narrow
//! Gaussian of width β_FWHM around the resonance. Different β belong to
//! distinguishable subensembles, so the observed distribution is the plain
//! arithmetic mean of the per-β distributions — never a coherent sum.
//!
//! Reproducibility contract (also surfaced on the CLI): β samples come from
//! `ChaCha8Rng::seed_from_u64(seed)` with the Box–Muller transform applied to
//! consecutive uniform doubles — u₁ is drawn first and mapped to (0, 1] as
//! 1 − u, then z₀ = √(−2 ln u₁)·cos(2πu₂) and z₁ = √(−2 ln u₁)·sin(2πu₂) are
//! both used (the final sin is discarded for odd sample counts), each scaled
//! by σ = fwhm / (2√(2 ln 2)). The per-β runs execute in a parallel map;
//! averaging folds the collected results in a fixed pairwise tree, so a given
//! build reproduces identical bytes regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{RatchetSpec, Route, WalkConfig};
use crate::error::{Result, WalkError};
use crate::near_resonant::near_resonant_distribution;
use crate::quantum_map::walk;
use crate::state::MomentumDistribution;

/// Gaussian β-ensemble description: width, size, seed, and the per-β engine.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    /// Full width at half maximum of the β distribution (dimensionless).
    pub fwhm: f64,
    /// Number of quasimomentum samples.
    pub samples: usize,
    /// PRNG seed; equal seeds give equal ensembles.
    pub seed: u64,
    /// Engine used per sample; the resonant closed form is β = 0 only and is
    /// rejected here.
    pub route: Route,
}

impl EnsembleSpec {
    pub fn new(fwhm: f64, samples: usize, seed: u64) -> Self {
        Self { fwhm, samples, seed, route: Route::Simulation }
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    /// Standard deviation σ = fwhm / (2√(2 ln 2)).
    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm >= 0.0) || !self.fwhm.is_finite() {
            return Err(WalkError::Config(format!("fwhm must be ≥ 0, got {}", self.fwhm)));
        }
        if self.samples == 0 {
            return Err(WalkError::Config("ensemble needs at least one sample".into()));
        }
        if self.route == Route::Resonant {
            return Err(WalkError::Config(
                "the resonant closed form only exists at β = 0; average over SIMULATION or \
                 NEAR_RESONANT instead"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Draws the quasimomentum samples for `spec` (see the module doc for the
/// exact PRNG contract). A zero width yields exact zeros.
pub fn sample_betas(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.fwhm == 0.0 {
        return Ok(vec![0.0; spec.samples]);
    }
    let sigma = spec.sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.samples);
    while out.len() < spec.samples {
        let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1] keeps the log finite
        let u2: f64 = rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        out.push(sigma * radius * angle.cos());
        if out.len() < spec.samples {
            out.push(sigma * radius * angle.sin());
        }
    }
    Ok(out)
}

/// Sums per-sample rows in a fixed pairwise tree (order independent of thread
/// count; error growth O(log N) instead of O(N)).
fn pairwise_sum(rows: &[Vec<f64>]) -> Vec<f64> {
    match rows.len() {
        0 => Vec::new(),
        1 => rows[0].clone(),
        n => {
            let (left, right) = rows.split_at(n / 2);
            let mut acc = pairwise_sum(left);
            let b = pairwise_sum(right);
            for (a, b) in acc.iter_mut().zip(&b) {
                *a += b;
            }
            acc
        }
    }
}

/// Incoherent ensemble average of the walk distribution over Gaussian β.
///
/// `config.beta` is ignored in favor of the drawn samples; everything else
/// (k, steps, grid) is shared, so all samples live on one grid. Any per-β
/// failure aborts the whole average — samples are never dropped silently.
pub fn averaged_distribution(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
    spec: &EnsembleSpec,
) -> Result<MomentumDistribution> {
    config.validate()?;
    ratchet.validate()?;
    let betas = sample_betas(spec)?;
    let per_sample: Vec<Result<MomentumDistribution>> = betas
        .par_iter()
        .map(|&beta| {
            let cfg = config.clone().with_beta(beta);
            match spec.route {
                Route::Simulation => walk(&cfg, ratchet),
                Route::NearResonant => near_resonant_distribution(&cfg, ratchet),
                Route::Resonant => unreachable!("rejected by EnsembleSpec::validate"),
            }
        })
        .collect();

    let mut p1_rows = Vec::with_capacity(spec.samples);
    let mut p2_rows = Vec::with_capacity(spec.samples);
    let mut n_max = 0;
    for result in per_sample {
        let dist = result?;
        n_max = dist.n_max();
        p1_rows.push(dist.p1);
        p2_rows.push(dist.p2);
    }
    let inv = 1.0 / spec.samples as f64;
    let mut p1 = pairwise_sum(&p1_rows);
    let mut p2 = pairwise_sum(&p2_rows);
    for v in p1.iter_mut().chain(p2.iter_mut()) {
        *v *= inv;
    }
    Ok(MomentumDistribution::from_parts(n_max, p1, p2, spec.route, config, ratchet))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_collapses_to_exact_zeros() {
        let spec = EnsembleSpec::new(0.0, 7, 99);
        assert_eq!(sample_betas(&spec).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn equal_seeds_reproduce_identical_samples() {
        let spec = EnsembleSpec::new(0.005, 1001, 2024);
        let a = sample_betas(&spec).unwrap();
        let b = sample_betas(&spec).unwrap();
        assert_eq!(a, b);
        let other = sample_betas(&EnsembleSpec::new(0.005, 1001, 2025)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn sample_moments_match_the_requested_width() {
        let spec = EnsembleSpec::new(0.005, 100_000, 12345);
        let betas = sample_betas(&spec).unwrap();
        let n = betas.len() as f64;
        let mean = betas.iter().sum::<f64>() / n;
        let var = betas.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / n;
        let sigma = spec.sigma();
        assert!((var.sqrt() / sigma - 1.0).abs() <= 0.02, "std {:.6e}", var.sqrt());
        // Standard error of the mean is σ/√n ≈ 6.7e−6.
        assert!(mean.abs() <= 5.0 * sigma / n.sqrt(), "mean {mean:.3e}");
    }

    #[test]
    fn power_of_two_average_of_identical_samples_is_exact() {
        let cfg = WalkConfig::new(2.0, 4);
        let ratchet = RatchetSpec::symmetric(&[0, 1]);
        let single = walk(&cfg, &ratchet).unwrap();
        let spec = EnsembleSpec::new(0.0, 4, 7);
        let averaged = averaged_distribution(&cfg, &ratchet, &spec).unwrap();
        assert_eq!(averaged.p1, single.p1);
        assert_eq!(averaged.p2, single.p2);
    }

    #[test]
    fn averaging_matches_the_naive_mean() {
        let cfg = WalkConfig::new(1.5, 3);
        let ratchet = RatchetSpec::symmetric(&[0, 1]);
        let spec = EnsembleSpec::new(0.004, 5, 31).with_route(Route::Simulation);
        let averaged = averaged_distribution(&cfg, &ratchet, &spec).unwrap();
        let betas = sample_betas(&spec).unwrap();
        let singles: Vec<_> = betas
            .iter()
            .map(|&b| walk(&cfg.clone().with_beta(b), &ratchet).unwrap())
            .collect();
        for idx in 0..averaged.len() {
            let naive: f64 = singles.iter().map(|d| d.p1[idx]).sum::<f64>() / 5.0;
            assert!((averaged.p1[idx] - naive).abs() <= 1e-14);
        }
        assert!((averaged.mass() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn repeated_averaging_is_bit_identical() {
        let cfg = WalkConfig::new(2.0, 5);
        let ratchet = RatchetSpec::symmetric(&[0, 1]);
        let spec = EnsembleSpec::new(0.005, 24, 8).with_route(Route::NearResonant);
        let a = averaged_distribution(&cfg, &ratchet, &spec).unwrap();
        let b = averaged_distribution(&cfg, &ratchet, &spec).unwrap();
        assert_eq!(a.p1, b.p1);
        assert_eq!(a.p2, b.p2);
    }

    #[test]
    fn vanishing_width_converges_to_the_resonant_distribution() {
        let cfg = WalkConfig::new(2.0, 6);
        let ratchet = RatchetSpec::symmetric(&[0, 1]);
        let spec = EnsembleSpec::new(1e-8, 16, 5);
        let averaged = averaged_distribution(&cfg, &ratchet, &spec).unwrap();
        let exact = walk(&cfg, &ratchet).unwrap();
        assert!(averaged.max_norm_distance(&exact).unwrap() <= 1e-8);
    }

    #[test]
    fn rejects_resonant_route_and_empty_ensembles() {
        let err = EnsembleSpec::new(0.01, 10, 1).with_route(Route::Resonant).validate();
        assert!(matches!(err, Err(WalkError::Config(_))));
        assert!(matches!(
            EnsembleSpec::new(0.01, 0, 1).validate(),
            Err(WalkError::Config(_))
        ));
        assert!(EnsembleSpec::new(-0.01, 4, 1).validate().is_err());
    }

    #[test]
    fn per_sample_failures_abort_the_average() {
        // A grid too small for the kick strength trips the leakage check.
        let cfg = WalkConfig::new(5.0, 10).with_n_max(4);
        let ratchet = RatchetSpec::symmetric(&[0]);
        let spec = EnsembleSpec::new(0.002, 6, 3);
        assert!(matches!(
            averaged_distribution(&cfg, &ratchet, &spec),
            Err(WalkError::Truncation { .. })
        ));
    }
}
