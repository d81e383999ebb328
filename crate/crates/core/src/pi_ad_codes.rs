//! Closed-form combinatorics of permutation-invariant codes under amplitude
//! damping.
//!
//! For a code whose words are superpositions of Dicke states, the matrix
//! element of `A_k† A_k'` between codewords depends on the damping labels
//! only through their weights and the size of their combined support. This
//! module evaluates those elements in closed form, certifies the exact
//! moment conditions that make the code approximately correctable, and
//! verifies two supporting binomial identities in big-integer arithmetic.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, ToPrimitive, Zero};

use crate::channels::SupportConfig;
use crate::code_space::PiCode;
use crate::comb::{binomial, factorial};
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, validate_grid, SlopeFit};

fn rat(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Matrix element `<jl| A_k† A_k' |jr>` between codewords, evaluated without
/// touching individual basis labels.
///
/// With `w`, `w'` the label weights and `tau` the size of their combined
/// support, the element is
///
/// ```text
/// gamma^((w+w')/2) * sum_v C(m-tau, v) (1-gamma)^v
///     * sqrt( lambda_{jl, v+w} lambda_{jr, v+w'} / (C(m, v+w) C(m, v+w')) )
/// ```
///
/// where `v` counts the excitations untouched by either label. The formula
/// follows from matching surviving basis labels pairwise; tests pin it
/// against direct sparse application of the effects. The value is real
/// because Dicke amplitudes are non-negative reals.
pub fn pi_matrix_element(
    code: &PiCode,
    jl: usize,
    jr: usize,
    cfg: SupportConfig,
    gamma: f64,
) -> Result<f64> {
    cfg.validate(code.qubits())?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let m = code.qubits();
    let w = cfg.left_weight;
    let wp = cfg.right_weight;
    let free = m - cfg.union_size;
    let mut total = 0.0;
    for (b, left) in code.support(jl) {
        if b < w {
            continue;
        }
        let v = b - w;
        if v > free {
            continue;
        }
        let b2 = v + wp;
        let right = code.weight(jr, b2);
        if right.is_zero() {
            continue;
        }
        let count = binomial(free as u64, v as u64);
        // One exact rational per term, converted to f64 only under the sqrt.
        let ratio = rat(&count * &count) * left * right
            / (crate::comb::binomial_ratio(m as u64, b as u64)
                * crate::comb::binomial_ratio(m as u64, b2 as u64));
        total += (1.0 - gamma).powi(v as i32) * ratio.to_f64().unwrap_or(0.0).sqrt();
    }
    let half_weight = w + wp;
    let damp = if half_weight % 2 == 0 {
        gamma.powi((half_weight / 2) as i32)
    } else {
        gamma.powi((half_weight / 2) as i32) * gamma.sqrt()
    };
    Ok(damp * total)
}

fn realizable_unions(m: u32, w: u32, wp: u32) -> core::ops::RangeInclusive<u32> {
    w.max(wp)..=(w + wp).min(m)
}

/// Largest Knill-Laflamme perturbation over all effect pairs of weight at
/// most `t`: the matrix elements are compared against the codeword average
/// of the corresponding diagonal, and the biggest deviation is returned.
pub fn pi_eps_max(code: &PiCode, t: u32, gamma: f64) -> Result<f64> {
    if t > code.qubits() {
        return Err(Error::InvalidCode(alloc::format!(
            "truncation order {t} exceeds qubit count {}",
            code.qubits()
        )));
    }
    let mut best = 0.0f64;
    for w in 0..=t {
        for wp in 0..=t {
            for tau in realizable_unions(code.qubits(), w, wp) {
                let cfg = SupportConfig {
                    left_weight: w,
                    right_weight: wp,
                    union_size: tau,
                };
                let d0 = pi_matrix_element(code, 0, 0, cfg, gamma)?;
                let d1 = pi_matrix_element(code, 1, 1, cfg, gamma)?;
                let mean = 0.5 * (d0 + d1);
                best = best.max((d0 - mean).abs()).max((d1 - mean).abs());
                best = best.max(pi_matrix_element(code, 0, 1, cfg, gamma)?.abs());
                best = best.max(pi_matrix_element(code, 1, 0, cfg, gamma)?.abs());
            }
        }
    }
    Ok(best)
}

/// Largest codeword-diagonal disagreement over equal-weight effect pairs.
///
/// For codes passing [`certify_moment_conditions`] this decays one damping
/// order faster than the elements themselves.
pub fn moment_difference_max(code: &PiCode, t: u32, gamma: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for w in 0..=t.min(code.qubits()) {
        for tau in realizable_unions(code.qubits(), w, w) {
            let cfg = SupportConfig {
                left_weight: w,
                right_weight: w,
                union_size: tau,
            };
            let d0 = pi_matrix_element(code, 0, 0, cfg, gamma)?;
            let d1 = pi_matrix_element(code, 1, 1, cfg, gamma)?;
            best = best.max((d0 - d1).abs());
        }
    }
    Ok(best)
}

/// Exact weighted moments `sum_b lambda_{j,b} C(m-b, c) C(b, l)` for both
/// codewords, over the rectangle `c <= t`, `l <= 2t`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    c_max: u32,
    l_max: u32,
    entries: [Vec<BigRational>; 2],
}

impl MomentTable {
    /// Inclusive upper bounds `(c_max, l_max)` of the stored rectangle.
    pub fn order_bounds(&self) -> (u32, u32) {
        (self.c_max, self.l_max)
    }

    pub fn value(&self, j: usize, c: u32, l: u32) -> &BigRational {
        assert!(j < 2 && c <= self.c_max && l <= self.l_max);
        &self.entries[j][(c * (self.l_max + 1) + l) as usize]
    }

    /// First `(c, l)` where the rows disagree, scanning `c` outer, `l` inner.
    pub fn first_mismatch(&self) -> Option<(u32, u32)> {
        for c in 0..=self.c_max {
            for l in 0..=self.l_max {
                if self.value(0, c, l) != self.value(1, c, l) {
                    return Some((c, l));
                }
            }
        }
        None
    }
}

/// Outcome of the exact moment certification.
#[derive(Debug, Clone)]
pub struct MomentCertificate {
    pub table: MomentTable,
    /// Rows agree entrywise over the whole rectangle.
    pub moments_match: bool,
    /// No weight sits on the top `t` excitation levels.
    pub support_confined: bool,
    pub first_mismatch: Option<(u32, u32)>,
}

impl MomentCertificate {
    pub fn holds(&self) -> bool {
        self.moments_match && self.support_confined
    }
}

/// Certifies in exact rational arithmetic that the code satisfies the
/// order-`t` moment conditions: equal moment rows for `c <= t`, `l <= 2t`,
/// and codeword support confined to excitation levels `<= m - t`.
pub fn certify_moment_conditions(code: &PiCode, t: u32) -> MomentCertificate {
    let m = code.qubits() as u64;
    let c_max = t;
    let l_max = 2 * t;
    let mut entries = [Vec::new(), Vec::new()];
    for (j, row) in entries.iter_mut().enumerate() {
        for c in 0..=c_max {
            for l in 0..=l_max {
                let mut acc = BigRational::zero();
                for (b, weight) in code.support(j) {
                    let coeff = binomial(m - b as u64, c as u64) * binomial(b as u64, l as u64);
                    acc += rat(coeff) * weight;
                }
                row.push(acc);
            }
        }
    }
    let table = MomentTable { c_max, l_max, entries };
    let first_mismatch = table.first_mismatch();
    let support_confined = (code.max_support() as i64) <= code.qubits() as i64 - t as i64;
    MomentCertificate {
        moments_match: first_mismatch.is_none(),
        support_confined,
        first_mismatch,
        table,
    }
}

/// Exact alternating moment sum `sum_{i=0}^{n} C(n, i) i^alpha (-1)^i`,
/// with the convention `0^0 = 1`.
///
/// The sum vanishes exactly when `alpha <= n - 1`; at `alpha = n` it equals
/// `(-1)^n n!`.
pub fn alternating_binomial_sum(n: u32, alpha: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for i in 0..=n {
        let power = if i == 0 && alpha == 0 {
            BigUint::one()
        } else {
            BigUint::from(i).pow(alpha)
        };
        let term = BigInt::from(binomial(n as u64, i as u64) * power);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The three faces of the binomial ratio identity used by the moment
/// argument, all exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioForms {
    /// `C(m-k-c, b-k) / C(m, b)`.
    pub lhs: BigRational,
    /// `C(b, k) C(m-b, c) / (C(m, k+c) C(k+c, c))`; equals `lhs` on the
    /// whole admissible range.
    pub corrected: BigRational,
    /// `C(b, k) / C(m, k-c) * C(m-b, c) C(k, c) (c!)^2`; kept for the
    /// discrepancy report, it diverges from `lhs` once `c >= 1`.
    pub printed: BigRational,
}

/// Evaluates the ratio identity at `(m, k, c, b)`.
///
/// Requires `c <= k <= b <= m - c`.
pub fn binomial_ratio_forms(m: u64, k: u64, c: u64, b: u64) -> Result<RatioForms> {
    if !(c <= k && k <= b && b + c <= m) {
        return Err(Error::RatioParamsOutOfRange { m, k, c, b });
    }
    let lhs = crate::comb::binomial_ratio(m - k - c, b - k) / crate::comb::binomial_ratio(m, b);
    let corrected = rat(binomial(b, k) * binomial(m - b, c))
        / rat(binomial(m, k + c) * binomial(k + c, c));
    let fact_c = factorial(c);
    let printed = rat(binomial(b, k) * binomial(m - b, c) * binomial(k, c) * &fact_c * &fact_c)
        / rat(binomial(m, k - c));
    Ok(RatioForms { lhs, corrected, printed })
}

/// True when the excitation gap between the two codeword supports exceeds
/// the largest level shift any pair of weight `<= t` effects can produce,
/// which forces every cross matrix element to vanish identically.
pub fn cross_terms_vanish(code: &PiCode) -> bool {
    let shift_bound = 2 * code.order() as i64;
    let mut min_gap = i64::MAX;
    for (b0, _) in code.support(0) {
        for (b1, _) in code.support(1) {
            min_gap = min_gap.min((b0 as i64 - b1 as i64).abs());
        }
    }
    min_gap > shift_bound
}

/// Fits the decay order of the Knill-Laflamme perturbation over a damping
/// grid; the grid must span at least 1.5 decades inside `(0, 0.1]`.
pub fn epsilon_order_fit(code: &PiCode, t: u32, grid: &[f64]) -> Result<SlopeFit> {
    validate_grid(grid)?;
    let eps: Vec<f64> = grid
        .iter()
        .map(|&g| pi_eps_max(code, t, g))
        .collect::<Result<_>>()?;
    log_log_fit(grid, &eps)
}
