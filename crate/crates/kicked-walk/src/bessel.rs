//! Integer-order Bessel functions J_n of real and complex argument.
//!
//! The kick operator expands through the Jacobi–Anger identity
//!
//! ```text
//! exp(±ik cosθ) = Σ_m (±i)^m J_m(k) exp(imθ)
//! ```
//!
//! so every route needs J_n over a contiguous block of orders. Arguments stay
//! real at exact resonance and pick up a small imaginary part `z = k·Σ e^{−iτβl}`
//! in the near-resonant path sum.
//!
//! Evaluation strategy on the supported disc |z| ≤ [`BESSEL_MAX_ARG`]:
//!
//! * ascending power series where it is well conditioned (|z| ≤ 2, or
//!   |z| ≤ 12 when the order dominates, n ≥ |z|²/4 — the alternating terms
//!   then decay from the start and no cancellation is amplified);
//! * otherwise a single normalized backward recurrence (Miller's algorithm),
//!   started `⌈1.5|z|⌉ + 30` orders above the highest requested one and
//!   normalized with `J_0 + 2Σ J_{2m} = 1`, which holds for complex argument.
//!
//! Negative orders and arguments with negative real part are folded back with
//! `J_{−n}(z) = (−1)^n J_n(z) = J_n(−z)` *before* evaluation, so those
//! symmetries hold bit-for-bit in the output.

use num_complex::Complex64 as C64;

use crate::error::{Result, WalkError};
use crate::tolerances::BESSEL_MAX_ARG;

const EPS: f64 = f64::EPSILON;
/// Rescaling threshold for the backward recurrence (headroom before overflow).
const RESCALE_AT: f64 = 1e250;

/// Value plus a conservative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub value: C64,
    /// Upper bound on the absolute error (series truncation + rounding, or
    /// recurrence rounding). Stays below `1e-12 · max(1, |value|)` on the
    /// supported disc.
    pub est_error: f64,
}

fn check_range(z: C64) -> Result<()> {
    let abs = z.norm();
    if !(abs <= BESSEL_MAX_ARG) {
        return Err(WalkError::BesselRange { abs, max: BESSEL_MAX_ARG });
    }
    Ok(())
}

/// parity sign (−1)^n
#[inline]
fn neg1_pow(n: i32) -> f64 {
    if n & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn series_conditioned(n: i32, abs: f64) -> bool {
    abs <= 12.0 && (abs <= 2.0 || n as f64 >= 0.25 * abs * abs)
}

/// J_n(z) for integer n, |z| ≤ [`BESSEL_MAX_ARG`].
pub fn bessel_j(n: i32, z: C64) -> Result<C64> {
    Ok(bessel_j_eval(n, z)?.value)
}

/// J_n(z) with an error estimate attached.
pub fn bessel_j_eval(n: i32, z: C64) -> Result<BesselEval> {
    check_range(z)?;
    // Fold symmetries first so they are exact in the output.
    if n < 0 {
        let mut e = bessel_j_eval(-n, z)?;
        e.value *= neg1_pow(n);
        return Ok(e);
    }
    if z.re < 0.0 {
        let mut e = bessel_j_eval(n, -z)?;
        e.value *= neg1_pow(n);
        return Ok(e);
    }
    let abs = z.norm();
    if abs == 0.0 {
        return Ok(BesselEval { value: C64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0), est_error: 0.0 });
    }
    if series_conditioned(n, abs) {
        Ok(series(n, z))
    } else {
        let (row, est) = miller_row(z, n)?;
        Ok(BesselEval { value: row[n as usize], est_error: est })
    }
}

/// Ascending series Σ (−1)^m (z/2)^{n+2m} / (m!(n+m)!), n ≥ 0, conditioned region.
fn series(n: i32, z: C64) -> BesselEval {
    let half = 0.5 * z;
    // t0 = (z/2)^n / n!, built factor by factor: intermediate magnitudes stay
    // ≤ exp(|z|/2) in the conditioned region, far from overflow.
    let mut term = C64::new(1.0, 0.0);
    for j in 1..=n {
        term *= half / j as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut max_partial = sum.norm();
    let mut m = 0u32;
    let tail;
    loop {
        m += 1;
        term *= -q / (m as f64 * (m as f64 + n as f64));
        sum += term;
        max_partial = max_partial.max(sum.norm());
        if term.norm() <= 0.25 * EPS * sum.norm() || m >= 300 {
            tail = term.norm();
            break;
        }
    }
    let est = tail + EPS * (2.0 + 2.0 * m as f64) * max_partial.max(sum.norm());
    BesselEval { value: sum, est_error: est }
}

/// Backward recurrence from above `top`, normalized via `J_0 + 2Σ J_{2m} = 1`.
/// Returns `(J_0 ..= J_top, est_error)`. Requires Re z ≥ 0 on the supported disc.
fn miller_row(z: C64, top: i32) -> Result<(Vec<C64>, f64)> {
    let abs = z.norm();
    debug_assert!(abs > 0.0 && z.re >= 0.0);
    let start = top + (1.5 * abs).ceil() as i32 + 30;
    let inv_z = 1.0 / z;
    let mut row = vec![C64::ZERO; (start + 1) as usize];
    let mut f_up = C64::ZERO; // f_{ν+1}
    let mut f = C64::new(1e-30, 0.0); // f_ν, arbitrary seed
    row[start as usize] = f;
    for nu in (1..=start).rev() {
        let f_down = 2.0 * nu as f64 * inv_z * f - f_up;
        f_up = f;
        f = f_down;
        row[(nu - 1) as usize] = f;
        if f.norm_sqr() > RESCALE_AT * RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            f *= s;
            f_up *= s;
            for v in row[(nu - 1) as usize..].iter_mut() {
                *v *= s; // tail entries shrink toward 0, their true scale
            }
        }
    }
    let mut norm = row[0];
    let mut m = 2usize;
    while m < row.len() {
        norm += 2.0 * row[m];
        m += 2;
    }
    if norm.norm() == 0.0 {
        // Cannot happen on the supported disc; guard division anyway.
        return Err(WalkError::BesselRange { abs, max: BESSEL_MAX_ARG });
    }
    let inv_norm = 1.0 / norm;
    let mut max_val = 0.0f64;
    for v in row.iter_mut() {
        *v *= inv_norm;
        max_val = max_val.max(v.norm());
    }
    row.truncate(top as usize + 1);
    let est = EPS * start as f64 * max_val;
    Ok((row, est))
}

/// J_ν(z) for every ν in `n_lo..=n_hi`, one backward pass.
///
/// Negative orders are filled from the positive half row through
/// `J_{−ν} = (−1)^ν J_ν`, so the symmetry is exact. Index `i` of the result
/// corresponds to order `n_lo + i`.
pub fn bessel_row(z: C64, n_lo: i32, n_hi: i32) -> Result<Vec<C64>> {
    if n_lo > n_hi {
        return Err(WalkError::Config(format!("empty order range {n_lo}..={n_hi}")));
    }
    check_range(z)?;
    if z.re < 0.0 {
        let mut row = bessel_row(-z, n_lo, n_hi)?;
        for (i, v) in row.iter_mut().enumerate() {
            *v *= neg1_pow(n_lo + i as i32);
        }
        return Ok(row);
    }
    let abs = z.norm();
    let top = n_lo.abs().max(n_hi.abs());
    let half: Vec<C64> = if abs == 0.0 {
        let mut h = vec![C64::ZERO; top as usize + 1];
        h[0] = C64::new(1.0, 0.0);
        h
    } else if abs <= 2.0 {
        // Fully conditioned series for every order; avoids the recurrence's
        // steep growth at small |z|.
        (0..=top).map(|nu| series(nu, z).value).collect()
    } else {
        miller_row(z, top)?.0
    };
    let mut out = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    for nu in n_lo..=n_hi {
        let v = half[nu.unsigned_abs() as usize];
        out.push(if nu < 0 { v * neg1_pow(nu) } else { v });
    }
    Ok(out)
}

/// Real-argument row, same contract as [`bessel_row`].
pub fn bessel_row_real(x: f64, n_lo: i32, n_hi: i32) -> Result<Vec<f64>> {
    let row = bessel_row(C64::new(x, 0.0), n_lo, n_hi)?;
    Ok(row.into_iter().map(|v| v.re).collect())
}
