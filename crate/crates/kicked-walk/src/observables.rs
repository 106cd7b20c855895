//! Scalar diagnostics of momentum distributions.
//!
//! These are the quantities the walk is judged by: the directed ratchet
//! current (mean momentum), the ballistic spread (standard deviation growing
//! linearly with step number), the positions of the two walk fronts, and L1
//! distances between routes. All take the integer-class distributions as-is;
//! the conserved quasimomentum offset β is deliberately not added to the
//! moments.

use crate::config::{RatchetSpec, WalkConfig};
use crate::error::{Result, WalkError};
use crate::quantum_map::walk;
use crate::state::MomentumDistribution;
use crate::tolerances::NORMALIZATION_TOL;

/// Least-squares line of the momentum spread versus step number.
#[derive(Debug, Clone, PartialEq)]
pub struct BallisticFit {
    /// Spread gained per step.
    pub slope: f64,
    pub intercept: f64,
    /// Goodness of fit in [0, 1]; 0 also flags a degenerate (constant) fit.
    pub r_squared: f64,
    /// Smallest and largest step count entering the fit.
    pub t_range: (u32, u32),
}

fn checked_mass(dist: &MomentumDistribution) -> Result<f64> {
    let mass = dist.mass();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(WalkError::Domain(format!(
            "distribution mass {mass} is not 1 within {NORMALIZATION_TOL:e}; moments would be \
             biased by truncation"
        )));
    }
    Ok(mass)
}

/// Mean momentum class Σ_n n·P(n) of a normalized distribution.
pub fn mean_momentum(dist: &MomentumDistribution) -> Result<f64> {
    checked_mass(dist)?;
    Ok(dist.grid().map(|n| n as f64 * dist.p_total(n)).sum())
}

/// Standard deviation of the momentum class under P(n).
pub fn std_dev(dist: &MomentumDistribution) -> Result<f64> {
    let mean = mean_momentum(dist)?;
    let var: f64 = dist
        .grid()
        .map(|n| {
            let d = n as f64 - mean;
            d * d * dist.p_total(n)
        })
        .sum();
    Ok(var.max(0.0).sqrt())
}

/// Local maxima of P(n) that reach at least half of the global maximum —
/// isolates the dominant walk fronts without per-run tuning.
pub fn peak_positions(dist: &MomentumDistribution) -> Vec<i32> {
    let totals = dist.totals();
    let max = totals.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = 0.5 * max;
    let n_of = |i: usize| i as i32 - dist.n_max();
    let mut peaks = Vec::new();
    for i in 0..totals.len() {
        let left = if i == 0 { f64::NEG_INFINITY } else { totals[i - 1] };
        let right = if i + 1 == totals.len() { f64::NEG_INFINITY } else { totals[i + 1] };
        if totals[i] >= threshold && totals[i] > left && totals[i] >= right {
            peaks.push(n_of(i));
        }
    }
    peaks
}

/// L1 distance Σ_{n ∉ exclude} |P_a(n) − P_b(n)| between two distributions on
/// the same grid. The exclusion set exists for the near-resonant comparisons,
/// whose error concentrates on the initial classes.
pub fn l1_distance(
    a: &MomentumDistribution,
    b: &MomentumDistribution,
    exclude: &[i32],
) -> Result<f64> {
    if a.n_max() != b.n_max() {
        return Err(WalkError::Domain(format!(
            "grid mismatch: n_max {} vs {}",
            a.n_max(),
            b.n_max()
        )));
    }
    Ok(a.grid()
        .filter(|n| !exclude.contains(n))
        .map(|n| (a.p_total(n) - b.p_total(n)).abs())
        .sum())
}

/// Runs the exact simulator for every requested step count and fits a line to
/// std_dev versus T. `config.steps` is overridden per run; everything else
/// (k, β, grid policy) is taken from the template.
pub fn ballistic_fit(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
    t_values: &[u32],
) -> Result<BallisticFit> {
    if t_values.len() < 4 {
        return Err(WalkError::Config(format!(
            "ballistic fit needs at least 4 step counts, got {}",
            t_values.len()
        )));
    }
    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let cfg = config.clone().with_steps(t);
        let dist = walk(&cfg, ratchet)?;
        points.push((t as f64, std_dev(&dist)?));
    }
    let (slope, intercept, r_squared) = least_squares_line(&points)
        .ok_or_else(|| WalkError::Config("step counts must not all be equal".into()))?;
    let t_min = *t_values.iter().min().expect("nonempty");
    let t_max = *t_values.iter().max().expect("nonempty");
    Ok(BallisticFit { slope, intercept, r_squared, t_range: (t_min, t_max) })
}

/// Ordinary least squares through `(x, y)` points: `(slope, intercept, r²)`,
/// with r² = 0 standing in for the 0/0 of constant data. `None` when fewer
/// than two points or all x equal.
pub fn least_squares_line(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let var_x: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    if var_x == 0.0 {
        return None;
    }
    let cov: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = cov / var_x;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 0.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Some((slope, intercept, r_squared))
}
