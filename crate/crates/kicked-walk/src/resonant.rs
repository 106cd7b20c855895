//! Closed form of the walk at quantum resonance (τ = 4π, β = 0).
//!
//! At resonance the free evolution is trivial and the T-step operator is a
//! 2×2 matrix of Laurent polynomials in `x = e^{ik cosθ}`:
//!
//! ```text
//! U^T = (1/√2)^T [[A₁, A₂], [A₃, A₄]],   N = T − 1,
//! A₁ = e^{−ik cosθ} p₁(z),   A₂ = i e^{+ik cosθ} p₂(z),
//! A₃(k) = A₂(−k),            A₄(k) = A₁(−k),
//! ```
//!
//! where `z = x + x⁻¹`, `z̃ = x⁻¹ − x`, and both families satisfy the
//! Dickson-style recursion `p^(N) = z·p^(N−1) − 2·p^(N−2)` with seeds
//! `p₁⁽⁰⁾ = p₂⁽⁰⁾ = 1`, `p₁⁽¹⁾ = z̃`, `p₂⁽¹⁾ = z`. Writing
//! `p_i^(N) = Σ_l a_{l,i} x^{N−2l}` and Fourier-transforming
//! `x^M → i^{n−s} J_{n−s}(M k)` gives the distribution
//!
//! ```text
//! X_σ(n) = Σ_l a_{l,1} Σ_s (−1)^s J_{n−s}(σ(N−2l−1)k)
//! Y_σ(n) = Σ_l a_{l,2} Σ_s (−1)^s J_{n−s}(σ(N−2l+1)k)
//! P₁(n) = [b₁²X₊² + b₂²Y₊²] / (2^T S)
//! P₂(n) = [b₂²X₋² + b₁²Y₋²] / (2^T S)
//! ```
//!
//! (the k → −k reflection that produces A₃, A₄ swaps which coefficient family
//! each level weight multiplies). The coefficients are exact integers; both
//! the recursion and the closed-form triple-binomial evaluation are kept in
//! arbitrary-precision arithmetic and must agree exactly.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::bessel::bessel_row_real;
use crate::config::{RatchetSpec, Route, WalkConfig};
use crate::error::{Result, WalkError};
use crate::state::MomentumDistribution;

/// Sparse Laurent polynomial with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    /// exponent → coefficient; zero coefficients are never stored.
    coeffs: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(exponent: i64, coeff: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if coeff != 0 {
            coeffs.insert(exponent, BigInt::from(coeff));
        }
        Self { coeffs }
    }

    pub fn coeff(&self, exponent: i64) -> BigInt {
        self.coeffs.get(&exponent).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn exponents(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }

    fn insert(&mut self, exponent: i64, value: BigInt) {
        if !value.is_zero() {
            self.coeffs.insert(exponent, value);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.coeffs {
            let v = out.coeff(e) + c;
            if v.is_zero() {
                out.coeffs.remove(&e);
            } else {
                out.coeffs.insert(e, v);
            }
        }
        out
    }

    pub fn scaled(&self, factor: i64) -> Self {
        let mut out = Self::zero();
        if factor == 0 {
            return out;
        }
        for (&e, c) in &self.coeffs {
            out.insert(e, c * factor);
        }
        out
    }

    /// Multiply by `x^shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        let mut out = Self::zero();
        for (&e, c) in &self.coeffs {
            out.insert(e + shift, c.clone());
        }
        out
    }

    /// Multiply by `z = x + x⁻¹`.
    pub fn mul_z(&self) -> Self {
        self.shifted(1).add(&self.shifted(-1))
    }
}

/// Coefficient tables `a_{l,1}`, `a_{l,2}` of order N: `a_i[l]` multiplies
/// `x^{N−2l}`, `l = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DicksonCoefficients {
    pub order: u32,
    pub a1: Vec<BigInt>,
    pub a2: Vec<BigInt>,
}

impl DicksonCoefficients {
    pub fn a1_f64(&self) -> Vec<f64> {
        self.a1.iter().map(|c| c.to_f64().expect("coefficient fits f64")).collect()
    }

    pub fn a2_f64(&self) -> Vec<f64> {
        self.a2.iter().map(|c| c.to_f64().expect("coefficient fits f64")).collect()
    }
}

fn extract_coefficients(order: u32, p: &LaurentPoly) -> Vec<BigInt> {
    let n = order as i64;
    debug_assert!(p.exponents().all(|e| e.abs() <= n && (e - n) % 2 == 0));
    (0..=n).map(|l| p.coeff(n - 2 * l)).collect()
}

/// Coefficient tables by running the recursion `p^(N) = z·p^(N−1) − 2·p^(N−2)`.
pub fn dickson_recursive(order: u32) -> DicksonCoefficients {
    // Seeds: p₁⁽⁰⁾ = p₂⁽⁰⁾ = 1, p₁⁽¹⁾ = z̃ = x⁻¹ − x, p₂⁽¹⁾ = z = x + x⁻¹.
    let mut p1_prev = LaurentPoly::one();
    let mut p1 = LaurentPoly::monomial(-1, 1).add(&LaurentPoly::monomial(1, -1));
    let mut p2_prev = LaurentPoly::one();
    let mut p2 = LaurentPoly::monomial(-1, 1).add(&LaurentPoly::monomial(1, 1));
    match order {
        0 => DicksonCoefficients {
            order,
            a1: extract_coefficients(0, &p1_prev),
            a2: extract_coefficients(0, &p2_prev),
        },
        _ => {
            for _ in 2..=order {
                let next1 = p1.mul_z().add(&p1_prev.scaled(-2));
                let next2 = p2.mul_z().add(&p2_prev.scaled(-2));
                p1_prev = std::mem::replace(&mut p1, next1);
                p2_prev = std::mem::replace(&mut p2, next2);
            }
            DicksonCoefficients {
                order,
                a1: extract_coefficients(order, &p1),
                a2: extract_coefficients(order, &p2),
            }
        }
    }
}

/// `binom(n, r)` with the combinatorial convention: 0 for r < 0, r > n, n < 0.
fn binom(n: i64, r: i64) -> BigInt {
    if r < 0 || n < 0 || r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::from(1);
    for j in 0..r {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Coefficient tables from the closed-form triple-binomial sums. Exactly
/// equal to [`dickson_recursive`] for every order.
pub fn dickson_closed_form(order: u32) -> DicksonCoefficients {
    let n = order as i64;
    let half = n / 2; // ⌊N/2⌋
    let scale = BigInt::from(1) << order; // 2^N

    let mut a1_scaled = Vec::with_capacity(order as usize + 1);
    let mut a2_scaled = Vec::with_capacity(order as usize + 1);
    for l in 0..=n {
        // 2^N a_{l,1} = Σ_j [binom(N,2j) − binom(N,2j+1)] Σ_m (−8)^m binom(j,m) binom(N−2m, l−m)
        //             − 2 Σ_j binom(N,2j+1) Σ_m (−8)^m binom(j,m) binom(N−2m−1, l−m)
        //             + 2 Σ_j binom(N,2j+1) Σ_{m≤l−1} (−8)^m binom(j,m) binom(N−2m−1, l−m−1)
        let mut s1 = BigInt::zero();
        for j in 0..=half {
            let even_minus_odd = binom(n, 2 * j) - binom(n, 2 * j + 1);
            let odd = binom(n, 2 * j + 1);
            let mut inner_a = BigInt::zero();
            let mut inner_b = BigInt::zero();
            let mut inner_c = BigInt::zero();
            let mut pow8 = BigInt::from(1); // (−8)^m
            for m in 0..=l {
                let jm = binom(j, m);
                if !jm.is_zero() {
                    inner_a += &pow8 * &jm * binom(n - 2 * m, l - m);
                    inner_b += &pow8 * &jm * binom(n - 2 * m - 1, l - m);
                    if m <= l - 1 {
                        inner_c += &pow8 * &jm * binom(n - 2 * m - 1, l - m - 1);
                    }
                }
                pow8 *= -8;
            }
            s1 += even_minus_odd * inner_a - 2 * &odd * inner_b + 2 * odd * inner_c;
        }
        a1_scaled.push(s1);

        // 2^N a_{l,2} = Σ_j binom(N+1, 2j+1) Σ_m (−8)^m binom(j,m) binom(N−2m, l−m)
        let mut s2 = BigInt::zero();
        for j in 0..=half {
            let outer = binom(n + 1, 2 * j + 1);
            if outer.is_zero() {
                continue;
            }
            let mut inner = BigInt::zero();
            let mut pow8 = BigInt::from(1);
            for m in 0..=l {
                inner += &pow8 * binom(j, m) * binom(n - 2 * m, l - m);
                pow8 *= -8;
            }
            s2 += outer * inner;
        }
        a2_scaled.push(s2);
    }

    let descale = |scaled: Vec<BigInt>| -> Vec<BigInt> {
        scaled
            .into_iter()
            .map(|v| {
                let r = &v % &scale;
                assert!(r.is_zero(), "closed-form coefficient {v} not divisible by 2^{order}");
                &v / &scale
            })
            .collect()
    };
    DicksonCoefficients { order, a1: descale(a1_scaled), a2: descale(a2_scaled) }
}

/// Momentum distribution at exact resonance via the coefficient tables.
///
/// Requires β = 0, the standard π/2 ladder, and T ≥ 1; the Bessel arguments
/// reach (N+1)·|k| = T·|k|, so T·|k| ≤ 64 bounds the usable range.
pub fn resonant_distribution(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
) -> Result<MomentumDistribution> {
    config.validate()?;
    ratchet.validate()?;
    if config.beta != 0.0 {
        return Err(WalkError::Domain(format!(
            "resonant closed form needs β = 0 (got {}); use the near-resonant route",
            config.beta
        )));
    }
    if !ratchet.has_standard_phase() {
        return Err(WalkError::Domain(
            "resonant closed form needs the standard π/2 phase ladder".into(),
        ));
    }
    if config.steps == 0 {
        return Err(WalkError::Domain("resonant closed form needs T ≥ 1".into()));
    }

    let t = config.steps;
    let order = t - 1; // N
    let coeffs = dickson_recursive(order);
    let a1 = coeffs.a1_f64();
    let a2 = coeffs.a2_f64();

    let n_max = config.resolved_n_max(ratchet);
    let len = (2 * n_max + 1) as usize;
    let class_reach = ratchet.classes.iter().map(|s| s.abs()).max().unwrap_or(0);
    let nu_span = n_max + class_reach;

    // ρ_μ(n) = Σ_s (−1)^s J_{n−s}(μk) for every multiple μ that appears.
    let mut rho: HashMap<i32, Vec<f64>> = HashMap::new();
    let n_i64 = order as i64;
    let mut multiples: Vec<i32> = Vec::new();
    for l in 0..=n_i64 {
        for with in [n_i64 - 2 * l - 1, n_i64 - 2 * l + 1] {
            for sigma in [1i64, -1] {
                multiples.push((sigma * with) as i32);
            }
        }
    }
    multiples.sort_unstable();
    multiples.dedup();
    for &mu in &multiples {
        let row = bessel_row_real(mu as f64 * config.k, -nu_span, nu_span)?;
        let at = |nu: i32| row[(nu + nu_span) as usize];
        let mut values = vec![0.0f64; len];
        for (i, v) in values.iter_mut().enumerate() {
            let n = i as i32 - n_max;
            let mut acc = 0.0;
            for (si, &s) in ratchet.classes.iter().enumerate() {
                let sign = if si % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * at(n - s);
            }
            *v = acc;
        }
        rho.insert(mu, values);
    }

    let (b1, b2) = ratchet.weights;
    let norm = 0.5f64.powi(t as i32) / ratchet.class_count() as f64;
    let mut p1 = vec![0.0f64; len];
    let mut p2 = vec![0.0f64; len];
    for i in 0..len {
        let mut x = [0.0f64; 2]; // X_σ for σ = +, −
        let mut y = [0.0f64; 2]; // Y_σ
        for (l, (&c1, &c2)) in a1.iter().zip(&a2).enumerate() {
            let mu1 = (n_i64 - 2 * l as i64 - 1) as i32;
            let mu2 = (n_i64 - 2 * l as i64 + 1) as i32;
            for (si, sigma) in [1i32, -1].into_iter().enumerate() {
                x[si] += c1 * rho[&(sigma * mu1)][i];
                y[si] += c2 * rho[&(sigma * mu2)][i];
            }
        }
        p1[i] = norm * (b1 * b1 * x[0] * x[0] + b2 * b2 * y[0] * y[0]);
        p2[i] = norm * (b2 * b2 * x[1] * x[1] + b1 * b1 * y[1] * y[1]);
    }

    Ok(MomentumDistribution::from_parts(n_max, p1, p2, Route::Resonant, config, ratchet))
}
