//! Galton-board path sum for the walk slightly off resonance.
//!
//! Near τ = 4π the free evolution reduces (up to per-momentum global phases)
//! to one rotation angle ω = τβ per step. Commuting the free factors through
//! the kicks turns the T-step operator into a product of coin-kick blocks in
//! which the kick at step t sees the angle θ − (T−t)ω. Expanding each kick to
//! its two internal-level branches yields 2^T "Galton board" paths: path `c`
//! takes a −k branch at every rotation slot where its bit is set and a +k
//! branch elsewhere, so the whole path acts like one kick of complex
//! effective strength
//!
//! ```text
//! k_eff(c) = k · Σ_{l=0}^{T−1} (−1)^{c_l} (e^{−iτβ})^l .
//! ```
//!
//! Collecting the coin factors of a path into a power of i per output level
//! (done symbolically via the step matrix chain, see [`expand_coin_chain`])
//! gives the level distributions
//!
//! ```text
//! P_ℓ(n) ≈ (1 / (2^T S)) |Σ_s e^{−is(φ+π/2)} e^{−iτβ(T−1)s}
//!            Σ_c b(c) i^{α_ℓ(c)} J_{n−s}(k_eff(c))|² ,
//! ```
//!
//! where b(c) is the initial-level weight the path started from (for the
//! balanced b₁ = b₂ = 1/√2 this is the usual global 1/2). The only
//! approximation is merging each path's two conjugate rotation phases into a
//! single complex Bessel argument; it is exact at β = 0 and degrades with
//! |β|·T, which is why callers are warned beyond the standard validity
//! budget. At β = 0 all paths with the same signed branch count share the
//! integer argument, so the sum collapses to at most T+1 groups; that grouped
//! path is always taken there.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bessel::{bessel_row, bessel_row_real};
use crate::config::{RatchetSpec, Route, WalkConfig};
use crate::error::{Result, WalkError};
use crate::state::MomentumDistribution;
use crate::tolerances::VALIDITY_BUDGET;

/// Largest supported step count for the explicit 2^T enumeration.
pub const MAX_PATH_STEPS: u32 = 20;

/// Fixed number of paths per parallel work unit; partial sums are folded in
/// chunk order so the result is independent of thread count.
const PATH_CHUNK: usize = 2048;

/// One monomial of the expanded coin-kick chain: a sign pattern over the
/// rotation slots plus, for each output level, the accumulated power of i and
/// the initial level the path started from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathTerm {
    /// Branch pattern in rotation order: bit l set means the kick paired with
    /// phase (e^{−iτβ})^l took the level-1 branch and contributes −k.
    pub signs: u32,
    /// Power of i on the level-1 output row.
    pub phase1: u8,
    /// Initial level (0 ⇒ weight b₁, 1 ⇒ b₂) feeding the level-1 output row.
    pub col1: u8,
    /// Power of i on the level-2 output row.
    pub phase2: u8,
    /// Initial level feeding the level-2 output row.
    pub col2: u8,
}

impl PathTerm {
    /// Branch pattern in step order: bit t−1 set means the kick of step t
    /// (t = 1 acts first) took the level-1 branch. Step t sits in rotation
    /// slot T−t, so this is the bit reversal of `signs`.
    pub fn step_mask(&self, steps: u32) -> u32 {
        self.signs.reverse_bits() >> (32 - steps)
    }
}

/// The full symbolic expansion of the T-step coin-kick chain.
#[derive(Debug, Clone)]
pub struct PathExpansion {
    steps: u32,
    terms: Vec<PathTerm>,
}

impl PathExpansion {
    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// All 2^T monomials, ordered by ascending step mask.
    pub fn terms(&self) -> &[PathTerm] {
        &self.terms
    }
}

/// Complex effective kick strength of one sign pattern (rotation order).
pub fn effective_strength(k: f64, tau_beta: f64, signs: u32, steps: u32) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for l in 0..steps {
        let rot = C64::from_polar(1.0, -tau_beta * l as f64);
        if signs & (1 << l) != 0 {
            acc -= rot;
        } else {
            acc += rot;
        }
    }
    k * acc
}

/// Symbolically expands the ordered product of the T step matrices
///
/// ```text
/// [[(−1)^{m_t}, i], [i(−1)^{m_t}, 1]]
/// ```
///
/// (step 1 rightmost) into its 2^T monomials. Each monomial records which
/// steps carry the (−1)^{m_t} factor and, per output row, the accumulated
/// power of i together with the column (initial level) it multiplies; the
/// expansion is exact, with every sign pattern appearing exactly once per
/// row.
pub fn expand_coin_chain(steps: u32) -> Result<PathExpansion> {
    if steps == 0 || steps > MAX_PATH_STEPS {
        return Err(WalkError::Config(format!(
            "path expansion supports 1..={MAX_PATH_STEPS} steps, got {steps}"
        )));
    }
    // Working entries indexed by step mask: (α row 1, col row 1, α row 2, col row 2).
    // One step: row 1 = [(−1)^m | col 0] + [i | col 1]; row 2 = [i(−1)^m | col 0] + [1 | col 1].
    let mut table: Vec<(u8, u8, u8, u8)> = vec![(1, 1, 0, 1), (0, 0, 1, 0)];
    for grown in 1..steps {
        let bit = 1usize << grown;
        let mut next = vec![(0u8, 0u8, 0u8, 0u8); table.len() * 2];
        for (mask, &(a1, c1, a2, c2)) in table.iter().enumerate() {
            // New leftmost matrix: row 1 ← (−1)^m·row1 + i·row2, row 2 ← i(−1)^m·row1 + row2.
            next[mask | bit] = (a1, c1, (a1 + 1) % 4, c1);
            next[mask] = ((a2 + 1) % 4, c2, a2, c2);
        }
        table = next;
    }
    let terms = table
        .into_iter()
        .enumerate()
        .map(|(mask, (phase1, col1, phase2, col2))| PathTerm {
            signs: (mask as u32).reverse_bits() >> (32 - steps),
            phase1,
            col1,
            phase2,
            col2,
        })
        .collect();
    Ok(PathExpansion { steps, terms })
}

/// Gaussian-integer phase sums of one resonant path group, split by the
/// initial level the paths started from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathGroup {
    /// Number of sign patterns in the group.
    pub count: u64,
    /// Σ i^{α₁(c)} over the group as (re, im), indexed by starting column.
    pub row1: [(i64, i64); 2],
    /// Σ i^{α₂(c)} over the group.
    pub row2: [(i64, i64); 2],
}

fn add_unit_phase(acc: &mut (i64, i64), alpha: u8) {
    match alpha % 4 {
        0 => acc.0 += 1,
        1 => acc.1 += 1,
        2 => acc.0 -= 1,
        _ => acc.1 -= 1,
    }
}

/// Collapses the 2^T paths into groups sharing the integer strength multiple
/// μ = T − 2·(number of −k branches) ∈ {−T, −T+2, …, T}, accumulating each
/// group's exact phase sums. Only meaningful at β = 0, where μk is the common
/// Bessel argument of the whole group; doubles as the bridge between the path
/// picture and the resonant coefficient tables.
pub fn group_paths_resonant(expansion: &PathExpansion) -> BTreeMap<i32, PathGroup> {
    let t = expansion.steps as i32;
    let mut groups: BTreeMap<i32, PathGroup> = BTreeMap::new();
    for term in &expansion.terms {
        let mu = t - 2 * term.signs.count_ones() as i32;
        let group = groups.entry(mu).or_default();
        group.count += 1;
        add_unit_phase(&mut group.row1[term.col1 as usize], term.phase1);
        add_unit_phase(&mut group.row2[term.col2 as usize], term.phase2);
    }
    groups
}

const UNIT_PHASES: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// Shared assembly context: grid geometry and per-class ladder phases.
struct Assembly {
    n_max: i32,
    len: usize,
    nu_span: i32,
    classes: Vec<i32>,
    /// e^{−is(φ+π/2)} e^{−iτβ(T−1)s} per class.
    ladder: Vec<C64>,
    weights: (f64, f64),
}

impl Assembly {
    fn new(config: &WalkConfig, ratchet: &RatchetSpec) -> Self {
        let n_max = config.resolved_n_max(ratchet);
        let class_reach = ratchet.classes.iter().map(|s| s.abs()).max().unwrap_or(0);
        let omega = config.tau * config.beta;
        let total = ratchet.phase + std::f64::consts::FRAC_PI_2
            + omega * (config.steps as f64 - 1.0);
        let ladder = ratchet
            .classes
            .iter()
            .map(|&s| C64::from_polar(1.0, -total * s as f64))
            .collect();
        Self {
            n_max,
            len: (2 * n_max + 1) as usize,
            nu_span: n_max + class_reach,
            classes: ratchet.classes.clone(),
            ladder,
            weights: ratchet.weights,
        }
    }

    /// Adds one path's (or group's) contribution: `row` holds J over orders
    /// −nu_span..=nu_span, `w1`/`w2` the collected prefactors per level.
    fn accumulate(&self, amp1: &mut [C64], amp2: &mut [C64], row: &[C64], w1: C64, w2: C64) {
        for idx in 0..self.len {
            let n = idx as i32 - self.n_max;
            let mut acc = C64::new(0.0, 0.0);
            for (phase, &s) in self.ladder.iter().zip(&self.classes) {
                acc += phase * row[(n - s + self.nu_span) as usize];
            }
            amp1[idx] += w1 * acc;
            amp2[idx] += w2 * acc;
        }
    }
}

fn amplitudes_grouped(
    config: &WalkConfig,
    expansion: &PathExpansion,
    asm: &Assembly,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let (b1, b2) = asm.weights;
    let mut amp1 = vec![C64::new(0.0, 0.0); asm.len];
    let mut amp2 = vec![C64::new(0.0, 0.0); asm.len];
    for (&mu, group) in &group_paths_resonant(expansion) {
        let row: Vec<C64> = bessel_row_real(mu as f64 * config.k, -asm.nu_span, asm.nu_span)?
            .into_iter()
            .map(|v| C64::new(v, 0.0))
            .collect();
        let gauss = |(re, im): (i64, i64)| C64::new(re as f64, im as f64);
        let w1 = b1 * gauss(group.row1[0]) + b2 * gauss(group.row1[1]);
        let w2 = b1 * gauss(group.row2[0]) + b2 * gauss(group.row2[1]);
        asm.accumulate(&mut amp1, &mut amp2, &row, w1, w2);
    }
    Ok((amp1, amp2))
}

fn amplitudes_enumerated(
    config: &WalkConfig,
    expansion: &PathExpansion,
    asm: &Assembly,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let (b1, b2) = asm.weights;
    let omega = config.tau * config.beta;
    let terms = expansion.terms();
    let partials: Vec<Result<(Vec<C64>, Vec<C64>)>> = terms
        .par_chunks(PATH_CHUNK)
        .map(|chunk| {
            let mut amp1 = vec![C64::new(0.0, 0.0); asm.len];
            let mut amp2 = vec![C64::new(0.0, 0.0); asm.len];
            for term in chunk {
                let k_eff = effective_strength(config.k, omega, term.signs, expansion.steps);
                let row = bessel_row(k_eff, -asm.nu_span, asm.nu_span)?;
                let b = [b1, b2];
                let w1 = b[term.col1 as usize] * UNIT_PHASES[term.phase1 as usize];
                let w2 = b[term.col2 as usize] * UNIT_PHASES[term.phase2 as usize];
                asm.accumulate(&mut amp1, &mut amp2, &row, w1, w2);
            }
            Ok((amp1, amp2))
        })
        .collect();

    let mut amp1 = vec![C64::new(0.0, 0.0); asm.len];
    let mut amp2 = vec![C64::new(0.0, 0.0); asm.len];
    for partial in partials {
        let (p1, p2) = partial?;
        for i in 0..asm.len {
            amp1[i] += p1[i];
            amp2[i] += p2[i];
        }
    }
    Ok((amp1, amp2))
}

fn distribution_impl(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
    force_enumerated: bool,
) -> Result<MomentumDistribution> {
    config.validate()?;
    ratchet.validate()?;
    if config.steps == 0 {
        return Err(WalkError::Domain(
            "path-sum route needs at least one step; the initial distribution is exact already"
                .into(),
        ));
    }
    if config.beta.abs() * config.steps as f64 > VALIDITY_BUDGET {
        log::warn!(
            "|β|·T = {:.3e} exceeds the {:.0}% validity budget of the path-sum approximation",
            config.beta.abs() * config.steps as f64,
            VALIDITY_BUDGET * 100.0
        );
    }
    let expansion = expand_coin_chain(config.steps)?;
    let asm = Assembly::new(config, ratchet);
    let (amp1, amp2) = if config.beta == 0.0 && !force_enumerated {
        amplitudes_grouped(config, &expansion, &asm)?
    } else {
        amplitudes_enumerated(config, &expansion, &asm)?
    };
    let norm = 0.5f64.powi(config.steps as i32) / ratchet.class_count() as f64;
    let p1 = amp1.iter().map(|a| a.norm_sqr() * norm).collect();
    let p2 = amp2.iter().map(|a| a.norm_sqr() * norm).collect();
    Ok(MomentumDistribution::from_parts(asm.n_max, p1, p2, Route::NearResonant, config, ratchet))
}

/// Momentum distribution from the 2^T path sum (grouped automatically at
/// β = 0). Exact at β = 0; an approximation otherwise, best while
/// |β|·T stays within [`VALIDITY_BUDGET`].
pub fn near_resonant_distribution(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
) -> Result<MomentumDistribution> {
    distribution_impl(config, ratchet, false)
}

/// Single-level slice of [`near_resonant_distribution`] (level ∈ {1, 2}).
pub fn near_resonant_level_distribution(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
    level: u8,
) -> Result<Vec<f64>> {
    let dist = near_resonant_distribution(config, ratchet)?;
    match level {
        1 => Ok(dist.p1),
        2 => Ok(dist.p2),
        _ => Err(WalkError::Config(format!("level must be 1 or 2, got {level}"))),
    }
}

#[cfg(test)]
pub(crate) fn distribution_enumerated_for_tests(
    config: &WalkConfig,
    ratchet: &RatchetSpec,
) -> Result<MomentumDistribution> {
    distribution_impl(config, ratchet, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_map::walk;
    use crate::resonant::{dickson_recursive, resonant_distribution};
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_step_expansion_by_hand() {
        let e = expand_coin_chain(1).unwrap();
        assert_eq!(e.terms().len(), 2);
        // Step mask 0: the i·b₂ branch on row 1, the plain b₂ branch on row 2.
        assert_eq!(e.terms()[0], PathTerm { signs: 0, phase1: 1, col1: 1, phase2: 0, col2: 1 });
        // Step mask 1: the (−1)^m·b₁ branch on row 1, i(−1)^m·b₁ on row 2.
        assert_eq!(e.terms()[1], PathTerm { signs: 1, phase1: 0, col1: 0, phase2: 1, col2: 0 });
    }

    #[test]
    fn two_step_expansion_by_hand() {
        // R₂ row 1 = (−1)^{m₁+m₂} − (−1)^{m₁} (column 1) plus i(−1)^{m₂} + i
        // (column 2); row 2 = i(−1)^{m₁+m₂} + i(−1)^{m₁} plus −(−1)^{m₂} + 1.
        let e = expand_coin_chain(2).unwrap();
        let by_step: Vec<PathTerm> = e.terms().to_vec();
        // terms() is ordered by step mask {}, {1}, {2}, {1,2}.
        assert_eq!(by_step[0], PathTerm { signs: 0, phase1: 1, col1: 1, phase2: 0, col2: 1 });
        assert_eq!(by_step[1], PathTerm { signs: 2, phase1: 2, col1: 0, phase2: 1, col2: 0 });
        assert_eq!(by_step[2], PathTerm { signs: 1, phase1: 1, col1: 1, phase2: 2, col2: 1 });
        assert_eq!(by_step[3], PathTerm { signs: 3, phase1: 0, col1: 0, phase2: 1, col2: 0 });
        for (i, term) in by_step.iter().enumerate() {
            assert_eq!(term.step_mask(2), i as u32);
        }
    }

    /// Exact Gaussian-integer product of the step matrices for given m values.
    fn chain_product(ms: &[u8]) -> [[(i64, i64); 2]; 2] {
        let mul = |a: (i64, i64), b: (i64, i64)| {
            (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
        };
        let add = |a: (i64, i64), b: (i64, i64)| (a.0 + b.0, a.1 + b.1);
        let mut acc = [[(1, 0), (0, 0)], [(0, 0), (1, 0)]];
        for &m in ms {
            // Left-multiply by the next step matrix.
            let sign: i64 = if m % 2 == 0 { 1 } else { -1 };
            let step = [[(sign, 0), (0, 1)], [(0, sign), (1, 0)]];
            let mut next = [[(0i64, 0i64); 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    for t in 0..2 {
                        next[r][c] = add(next[r][c], mul(step[r][t], acc[t][c]));
                    }
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn expansion_reproduces_random_matrix_chains_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for t in 1..=8u32 {
            let expansion = expand_coin_chain(t).unwrap();
            for _ in 0..50 {
                let ms: Vec<u8> = (0..t).map(|_| rng.random_range(0..=7)).collect();
                let oracle = chain_product(&ms);
                let mut symbolic = [[(0i64, 0i64); 2]; 2];
                for term in expansion.terms() {
                    let step_mask = term.step_mask(t);
                    let mut parity = 0u32;
                    for (j, &m) in ms.iter().enumerate() {
                        if step_mask & (1 << j) != 0 {
                            parity += m as u32;
                        }
                    }
                    let sign = if parity % 2 == 0 { 1 } else { -1 };
                    let bump = |acc: &mut (i64, i64), alpha: u8| match alpha % 4 {
                        0 => acc.0 += sign,
                        1 => acc.1 += sign,
                        2 => acc.0 -= sign,
                        _ => acc.1 -= sign,
                    };
                    bump(&mut symbolic[0][term.col1 as usize], term.phase1);
                    bump(&mut symbolic[1][term.col2 as usize], term.phase2);
                }
                assert_eq!(symbolic, oracle, "T = {t}, m = {ms:?}");
            }
        }
    }

    #[test]
    fn effective_strength_matches_closed_forms_at_two_steps() {
        let k = 1.7;
        let w = 0.37;
        let rot = C64::from_polar(1.0, -w);
        let one = C64::new(1.0, 0.0);
        let cases = [
            (0b11u32, -k * (one + rot)),
            (0b10, k * (one - rot)),
            (0b01, k * (rot - one)),
            (0b00, k * (one + rot)),
        ];
        for (signs, want) in cases {
            let got = effective_strength(k, w, signs, 2);
            assert!((got - want).norm() <= 1e-15, "signs {signs:#b}");
        }
    }

    #[test]
    fn strength_bounded_by_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = rng.random_range(1..=12u32);
            let signs: u32 = rng.random_range(0..(1 << t));
            let k: f64 = rng.random_range(-4.0..4.0);
            let w: f64 = rng.random_range(-0.2..0.2);
            let k_eff = effective_strength(k, w, signs, t);
            assert!(k_eff.norm() <= k.abs() * t as f64 + 1e-9);
        }
    }

    #[test]
    fn resonant_groups_have_expected_sizes() {
        let e1 = expand_coin_chain(1).unwrap();
        let g1 = group_paths_resonant(&e1);
        assert_eq!(g1.keys().copied().collect::<Vec<_>>(), vec![-1, 1]);
        assert!(g1.values().all(|g| g.count == 1));

        let e2 = expand_coin_chain(2).unwrap();
        let g2 = group_paths_resonant(&e2);
        assert_eq!(g2.keys().copied().collect::<Vec<_>>(), vec![-2, 0, 2]);
        assert_eq!(g2[&-2].count, 1);
        assert_eq!(g2[&0].count, 2);
        assert_eq!(g2[&2].count, 1);

        // Binomial sizes in general.
        let e5 = expand_coin_chain(5).unwrap();
        let g5 = group_paths_resonant(&e5);
        assert_eq!(g5[&5].count, 1);
        assert_eq!(g5[&3].count, 5);
        assert_eq!(g5[&1].count, 10);
    }

    #[test]
    fn groups_bridge_to_dickson_coefficient_tables() {
        // Row-1 phase sums reproduce the resonant coefficient tables:
        // column 0 at multiple μ is a₁[(T−2−μ)/2], column 1 is i·a₂[(T−μ)/2],
        // and row 2 is row 1 with μ → −μ and the columns swapped.
        for t in 1..=8u32 {
            let coeffs = dickson_recursive(t - 1);
            let groups = group_paths_resonant(&expand_coin_chain(t).unwrap());
            for (&mu, group) in &groups {
                let expect1 = {
                    let idx = t as i32 - 2 - mu;
                    if idx >= 0 && idx % 2 == 0 && (idx / 2) <= (t as i32 - 1) {
                        coeffs.a1[(idx / 2) as usize].to_i64().unwrap()
                    } else {
                        0
                    }
                };
                let expect2 = {
                    let idx = t as i32 - mu;
                    if idx >= 0 && idx % 2 == 0 && (idx / 2) <= (t as i32 - 1) {
                        coeffs.a2[(idx / 2) as usize].to_i64().unwrap()
                    } else {
                        0
                    }
                };
                assert_eq!(group.row1[0], (expect1, 0), "T = {t}, μ = {mu}, col 0");
                assert_eq!(group.row1[1], (0, expect2), "T = {t}, μ = {mu}, col 1");
                let mirror = &groups[&-mu];
                assert_eq!(group.row2[0], mirror.row1[1], "T = {t}, μ = {mu}, row 2 col 0");
                assert_eq!(group.row2[1], mirror.row1[0], "T = {t}, μ = {mu}, row 2 col 1");
            }
        }
    }

    #[test]
    fn grouped_and_enumerated_agree_at_resonance() {
        for (k, t) in [(2.0, 4u32), (1.0, 9), (3.0, 6)] {
            let cfg = WalkConfig::new(k, t);
            let ratchet = RatchetSpec::symmetric(&[0, 1]);
            let grouped = near_resonant_distribution(&cfg, &ratchet).unwrap();
            let enumerated = distribution_enumerated_for_tests(&cfg, &ratchet).unwrap();
            assert!(grouped.max_norm_distance(&enumerated).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn resonant_limit_matches_simulator_and_closed_form() {
        for t in [1u32, 2, 3, 6] {
            let cfg = WalkConfig::new(2.0, t);
            let ratchet = RatchetSpec::symmetric(&[0, 1]);
            let path_sum = near_resonant_distribution(&cfg, &ratchet).unwrap();
            let exact = walk(&cfg, &ratchet).unwrap();
            let closed = resonant_distribution(&cfg, &ratchet).unwrap();
            assert!(path_sum.max_norm_distance(&exact).unwrap() <= 1e-10, "T = {t} vs map");
            assert!(path_sum.max_norm_distance(&closed).unwrap() <= 1e-10, "T = {t} vs closed");
        }
    }

    #[test]
    fn resonant_limit_holds_with_biased_weights_and_wide_ratchet() {
        let cfg = WalkConfig::new(1.5, 4);
        let ratchet = RatchetSpec::symmetric(&[0, 1, 2]).with_weights(0.6, 0.8);
        let path_sum = near_resonant_distribution(&cfg, &ratchet).unwrap();
        let exact = walk(&cfg, &ratchet).unwrap();
        assert!(path_sum.max_norm_distance(&exact).unwrap() <= 1e-10);
    }

    #[test]
    fn single_step_is_exact_for_any_quasimomentum() {
        // One step involves a single real-argument kick, so the path sum is
        // exact off resonance too.
        for beta in [1e-4, 2e-3, 4.9e-3] {
            let cfg = WalkConfig::new(1.3, 1).with_beta(beta);
            let ratchet = RatchetSpec::symmetric(&[0]);
            let path_sum = near_resonant_distribution(&cfg, &ratchet).unwrap();
            let exact = walk(&cfg, &ratchet).unwrap();
            assert!(
                path_sum.max_norm_distance(&exact).unwrap() <= 1e-12,
                "β = {beta}"
            );
        }
    }

    /// Independent two-step formula assembled term by term from the four
    /// explicit matrix elements, with the b weights attached per column.
    fn two_step_by_hand(k: f64, beta: f64, ratchet: &RatchetSpec) -> (Vec<f64>, Vec<f64>) {
        let cfg = WalkConfig::new(k, 2).with_beta(beta);
        let omega = cfg.tau * beta;
        let n_max = cfg.resolved_n_max(ratchet);
        let len = (2 * n_max + 1) as usize;
        let rot = C64::from_polar(1.0, -omega);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let (b1, b2) = ratchet.weights;
        // (prefactor, argument, starting column) of the four row-1 and row-2 terms.
        let row1 = [
            (one, -k * (one + rot), 0usize),
            (-one, k * (one - rot), 0),
            (i, k * (rot - one), 1),
            (i, k * (one + rot), 1),
        ];
        let row2 = [
            (i, -k * (one + rot), 0usize),
            (i, k * (one - rot), 0),
            (-one, k * (rot - one), 1),
            (one, k * (one + rot), 1),
        ];
        let mut p1 = vec![0.0; len];
        let mut p2 = vec![0.0; len];
        let s_count = ratchet.class_count() as f64;
        for idx in 0..len {
            let n = idx as i32 - n_max;
            let assemble = |terms: &[(C64, C64, usize)]| -> f64 {
                let mut amp = C64::new(0.0, 0.0);
                for (si, &s) in ratchet.classes.iter().enumerate() {
                    let sign = if si % 2 == 0 { 1.0 } else { -1.0 };
                    let ladder = sign * C64::from_polar(1.0, -omega * s as f64);
                    for &(pref, arg, col) in terms {
                        let b = if col == 0 { b1 } else { b2 };
                        let row = bessel_row(arg, n - s, n - s).unwrap();
                        amp += ladder * pref * b * row[0];
                    }
                }
                amp.norm_sqr() / (4.0 * s_count)
            };
            p1[idx] = assemble(&row1);
            p2[idx] = assemble(&row2);
        }
        (p1, p2)
    }

    #[test]
    fn two_step_engine_matches_hand_coded_matrix_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let k: f64 = rng.random_range(0.5..3.0);
            let beta: f64 = rng.random_range(-5e-3..5e-3);
            let ratchet = RatchetSpec::symmetric(&[0, 1]);
            let cfg = WalkConfig::new(k, 2).with_beta(beta);
            let engine = near_resonant_distribution(&cfg, &ratchet).unwrap();
            let (p1, p2) = two_step_by_hand(k, beta, &ratchet);
            for idx in 0..engine.len() {
                assert!((engine.p1[idx] - p1[idx]).abs() <= 1e-12, "k={k} β={beta} idx={idx}");
                assert!((engine.p2[idx] - p2[idx]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn level_slices_match_full_distribution() {
        let cfg = WalkConfig::new(2.0, 3).with_beta(1e-3);
        let ratchet = RatchetSpec::symmetric(&[0, 1]);
        let dist = near_resonant_distribution(&cfg, &ratchet).unwrap();
        assert_eq!(near_resonant_level_distribution(&cfg, &ratchet, 1).unwrap(), dist.p1);
        assert_eq!(near_resonant_level_distribution(&cfg, &ratchet, 2).unwrap(), dist.p2);
        assert!(near_resonant_level_distribution(&cfg, &ratchet, 3).is_err());
    }

    #[test]
    fn rejects_zero_steps_and_enumeration_blowup() {
        let ratchet = RatchetSpec::symmetric(&[0]);
        let t0 = WalkConfig::new(1.0, 0);
        assert!(matches!(near_resonant_distribution(&t0, &ratchet), Err(WalkError::Domain(_))));
        let t21 = WalkConfig::new(0.1, 21).with_beta(1e-4);
        assert!(matches!(near_resonant_distribution(&t21, &ratchet), Err(WalkError::Config(_))));
        assert!(expand_coin_chain(0).is_err());
        assert!(expand_coin_chain(21).is_err());
    }

    #[test]
    fn merged_phase_error_scales_linearly_in_quasimomentum() {
        // Away from β = 0 the only approximation is merging each path's two
        // conjugate rotation phases into one complex Bessel argument, which
        // costs O(β) in the amplitudes. Pin the measured magnitude at a
        // reference point and check that shrinking β shrinks the deviation
        // proportionally (the error is structural, not numerical noise).
        let ratchet = RatchetSpec::symmetric(&[0, 1]);
        let deviation = |beta: f64| {
            let cfg = WalkConfig::new(2.0, 5).with_beta(beta);
            let approx = near_resonant_distribution(&cfg, &ratchet).unwrap();
            let exact = walk(&cfg, &ratchet).unwrap();
            approx.max_norm_distance(&exact).unwrap()
        };
        let d5 = deviation(1e-5);
        let d4 = deviation(1e-4);
        let d3 = deviation(1e-3);
        assert!(d4 <= 2e-3, "regression bound, measured {d4:.3e}");
        assert!(d5 < d4 && d4 < d3, "monotone growth: {d5:.3e}, {d4:.3e}, {d3:.3e}");
        let ratio = d5 / d4;
        assert!((0.05..=0.2).contains(&ratio), "β/10 should shrink ≈10×, got {ratio:.3}");
    }
}
