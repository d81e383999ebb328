//! The multi-qubit amplitude damping channel and its truncated Kraus sets.
//!
//! A tensor-power effect is indexed by a binary damping label: bit `i` set
//! means qubit `i` relaxes (`|1> -> |0>`, amplitude `sqrt(gamma)`), bit `i`
//! clear means the qubit keeps its state, with `|1>` attenuated by
//! `sqrt(1 - gamma)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Matrix2;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::code_space::{CodeSpace, SparseStateVector};
use crate::error::{Error, Result};

/// A binary damping pattern on `m` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DampingLabel {
    bits: u64,
    m: u32,
}

impl DampingLabel {
    pub fn new(m: u32, bits: u64) -> Result<Self> {
        if m > 63 || bits >= (1u64 << m) {
            return Err(Error::InvalidLabel { bits, m });
        }
        Ok(Self { bits, m })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn qubits(&self) -> u32 {
        self.m
    }

    /// Number of damped qubits; doubles as the order tag `gamma^{w/2}`.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Bit-string with qubit 0 leftmost.
    pub fn bit_string(&self) -> String {
        let mut s = String::with_capacity(self.m as usize);
        for i in 0..self.m {
            s.push(if self.bits >> i & 1 == 1 { '1' } else { '0' });
        }
        s
    }
}

impl core::fmt::Display for DampingLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.bit_string())
    }
}

/// Single-qubit amplitude damping Kraus pair `(A_0, A_1)` at rate `gamma`.
///
/// Valid on the closed interval `[0, 1]`; at the endpoints one of the
/// operators degenerates (gamma = 0 gives the identity and the zero matrix).
pub fn single_qubit_ad_effects(gamma: f64) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let z = Complex64::new(0.0, 0.0);
    let keep = Matrix2::new(
        Complex64::new(1.0, 0.0),
        z,
        z,
        Complex64::new((1.0 - gamma).sqrt(), 0.0),
    );
    let decay = Matrix2::new(z, Complex64::new(gamma.sqrt(), 0.0), z, z);
    Ok((keep, decay))
}

/// Applies the tensor-power effect `A_k` to a sparse state.
///
/// A basis label survives only if every damped qubit is excited; the damped
/// bits are cleared in the output label. The map is injective on surviving
/// labels, so no amplitude collisions occur.
pub fn apply_damping(label: DampingLabel, gamma: f64, state: &SparseStateVector) -> SparseStateVector {
    assert_eq!(label.qubits(), state.qubits());
    assert!((0.0..=1.0).contains(&gamma), "gamma must lie in [0, 1]");
    let k = label.bits();
    let w = label.weight();
    let sqrt_gamma = gamma.sqrt();
    let sqrt_keep = (1.0 - gamma).sqrt();
    let mut out = SparseStateVector::zero(state.qubits());
    for (x, amp) in state.iter() {
        if x & k != k {
            continue;
        }
        let kept_excitations = (x ^ k).count_ones();
        let factor = sqrt_gamma.powi(w as i32) * sqrt_keep.powi(kept_excitations as i32);
        out.add_amplitude(x ^ k, amp * Complex64::new(factor, 0.0));
    }
    out
}

/// All damping labels of weight at most `t`, ordered by weight then value.
#[derive(Debug, Clone)]
pub struct TruncatedKrausSet {
    m: u32,
    t: u32,
    gamma: f64,
    labels: Vec<DampingLabel>,
}

/// Builds the truncated Kraus set on `m` qubits keeping weights `<= t`.
///
/// The damping rate must lie strictly inside `(0, 1)`: at `gamma = 0` every
/// positive-weight effect is the zero operator and the truncated recovery is
/// undefined, and `gamma = 1` collapses the kept effects instead.
pub fn truncated_kraus_set(m: u32, t: u32, gamma: f64) -> Result<TruncatedKrausSet> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    if t > m {
        return Err(Error::InvalidCode(format!(
            "truncation order {t} exceeds qubit count {m}"
        )));
    }
    let mut labels = Vec::new();
    for w in 0..=t {
        for bits in crate::comb::weight_labels(m, w) {
            labels.push(DampingLabel { bits, m });
        }
    }
    Ok(TruncatedKrausSet { m, t, gamma, labels })
}

impl TruncatedKrausSet {
    pub fn qubits(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, idx: usize) -> DampingLabel {
        self.labels[idx]
    }

    pub fn labels(&self) -> &[DampingLabel] {
        &self.labels
    }

    /// Applies effect `idx` to a state.
    pub fn apply(&self, idx: usize, state: &SparseStateVector) -> SparseStateVector {
        apply_damping(self.labels[idx], self.gamma, state)
    }
}

/// Weight statistics of an ordered pair of damping labels.
///
/// Matrix elements of `A_k† A_k'` between permutation-invariant states
/// depend on the pair only through these three numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportConfig {
    pub left_weight: u32,
    pub right_weight: u32,
    /// Cardinality of the union of the two supports.
    pub union_size: u32,
}

impl SupportConfig {
    pub fn of_pair(left: DampingLabel, right: DampingLabel) -> Self {
        Self {
            left_weight: left.weight(),
            right_weight: right.weight(),
            union_size: (left.bits() | right.bits()).count_ones(),
        }
    }

    /// Checks `max(w, w') <= union <= min(m, w + w')`.
    pub fn validate(&self, m: u32) -> Result<()> {
        let lo = self.left_weight.max(self.right_weight);
        let hi = (self.left_weight + self.right_weight).min(m);
        if self.union_size < lo || self.union_size > hi {
            return Err(Error::InvalidSupportConfig {
                left: self.left_weight,
                right: self.right_weight,
                union: self.union_size,
            });
        }
        Ok(())
    }
}

/// Probability weight outside the truncated set, averaged over codewords:
/// `1 - (1/M) sum_beta sum_{A in Omega} |A |beta>|^2`.
pub fn truncation_defect(space: &CodeSpace, omega: &TruncatedKrausSet) -> f64 {
    assert_eq!(space.qubits(), omega.qubits());
    let mut kept = 0.0;
    for word in space.codewords() {
        for idx in 0..omega.len() {
            kept += omega.apply(idx, word).norm_sqr();
        }
    }
    1.0 - kept / space.dim() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_space::{as_code_space, build_pi_code};
    use crate::fit::{geometric_grid, log_log_fit, SlopeFit};
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense oracle: expands the state to 2^m entries and applies the
    /// explicit Kronecker product of single-qubit matrices.
    fn dense_apply(label: DampingLabel, gamma: f64, state: &SparseStateVector) -> Vec<Complex64> {
        let m = state.qubits();
        let dim = 1usize << m;
        let (keep, decay) = single_qubit_ad_effects(gamma).unwrap();
        let mut input = vec![c(0.0, 0.0); dim];
        for (l, a) in state.iter() {
            input[l as usize] = a;
        }
        let mut output = vec![c(0.0, 0.0); dim];
        for row in 0..dim {
            for col in 0..dim {
                // Entry of the tensor product: product over qubits of the
                // single-qubit matrix element selected by this label's bit.
                let mut entry = c(1.0, 0.0);
                for q in 0..m {
                    let r = (row >> q & 1) as usize;
                    let s = (col >> q & 1) as usize;
                    let single = if label.bits() >> q & 1 == 1 { &decay } else { &keep };
                    entry *= single[(r, s)];
                }
                output[row] += entry * input[col];
            }
        }
        output
    }

    fn random_state(rng: &mut ChaCha8Rng, m: u32) -> SparseStateVector {
        let dim = 1u64 << m;
        let mut v = SparseStateVector::zero(m);
        for label in 0..dim {
            v.add_amplitude(label, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        let n = v.norm();
        let mut v = v;
        v.scale(c(1.0 / n, 0.0));
        v
    }

    #[test]
    fn single_qubit_effects_at_endpoints() {
        let (keep, decay) = single_qubit_ad_effects(0.0).unwrap();
        assert_eq!(keep, Matrix2::identity());
        assert!(decay.iter().all(|z| *z == c(0.0, 0.0)));
        let (keep, decay) = single_qubit_ad_effects(1.0).unwrap();
        assert_eq!(keep[(1, 1)], c(0.0, 0.0));
        assert_eq!(decay[(0, 1)], c(1.0, 0.0));
        assert!(single_qubit_ad_effects(-0.1).is_err());
        assert!(single_qubit_ad_effects(1.1).is_err());
    }

    #[test]
    fn single_qubit_effects_are_trace_preserving() {
        let gamma = 0.19;
        let (keep, decay) = single_qubit_ad_effects(gamma).unwrap();
        let total = keep.adjoint() * keep + decay.adjoint() * decay;
        assert!((total - Matrix2::identity()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn apply_damping_annihilates_unexcited_qubits() {
        // A_1 |0> = 0 on one qubit.
        let label = DampingLabel::new(1, 1).unwrap();
        let out = apply_damping(label, 0.3, &SparseStateVector::basis(1, 0));
        assert_eq!(out.nnz(), 0);
        // A_1 |1> = sqrt(gamma) |0>.
        let out = apply_damping(label, 0.3, &SparseStateVector::basis(1, 1));
        assert_relative_eq!(out.amplitude(0).re, 0.3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn apply_damping_matches_dense_oracle() {
        let gamma = 0.27;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=2u32 {
            let state = random_state(&mut rng, m);
            for bits in 0..(1u64 << m) {
                let label = DampingLabel::new(m, bits).unwrap();
                let sparse = apply_damping(label, gamma, &state);
                let dense = dense_apply(label, gamma, &state);
                for (idx, expected) in dense.iter().enumerate() {
                    let got = sparse.amplitude(idx as u64);
                    assert!(
                        (got - expected).norm() < 1e-13,
                        "m={m} k={bits} idx={idx}: {got} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn apply_damping_is_linear() {
        let gamma = 0.42;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 4;
        let x = random_state(&mut rng, m);
        let y = random_state(&mut rng, m);
        let a = c(0.3, -0.8);
        let b = c(-1.1, 0.25);
        let mut combo = SparseStateVector::zero(m);
        combo.add_scaled(a, &x);
        combo.add_scaled(b, &y);
        for bits in [0u64, 1, 0b1010, 0b1111] {
            let label = DampingLabel::new(m, bits).unwrap();
            let lhs = apply_damping(label, gamma, &combo);
            let mut rhs = SparseStateVector::zero(m);
            rhs.add_scaled(a, &apply_damping(label, gamma, &x));
            rhs.add_scaled(b, &apply_damping(label, gamma, &y));
            for (l, amp) in lhs.iter() {
                assert!((amp - rhs.amplitude(l)).norm() < 1e-13);
            }
            assert_eq!(lhs.nnz(), rhs.nnz());
        }
    }

    #[test]
    fn full_label_set_is_trace_preserving() {
        // Summing |A_k |psi>|^2 over all 2^m labels returns the norm.
        let gamma = 0.37;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for m in 1..=6u32 {
            let state = random_state(&mut rng, m);
            let mut total = 0.0;
            for bits in 0..(1u64 << m) {
                let label = DampingLabel::new(m, bits).unwrap();
                total += apply_damping(label, gamma, &state).norm_sqr();
            }
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn truncated_set_counts_and_order() {
        let omega = truncated_kraus_set(4, 2, 0.1).unwrap();
        // 1 + 4 + 6 labels, sorted by weight then value.
        assert_eq!(omega.len(), 11);
        let weights: Vec<u32> = omega.labels().iter().map(|l| l.weight()).collect();
        assert!(weights.windows(2).all(|w| w[0] <= w[1]));
        let values: Vec<u64> = omega.labels().iter().map(|l| l.bits()).collect();
        assert_eq!(&values[..5], &[0, 1, 2, 4, 8]);
        assert_eq!(&values[5..], &[3, 5, 6, 9, 10, 12]);

        let omega = truncated_kraus_set(13, 1, 0.01).unwrap();
        assert_eq!(omega.len(), 14);
    }

    #[test]
    fn truncated_set_rejects_closed_interval_endpoints() {
        assert!(matches!(
            truncated_kraus_set(3, 1, 0.0),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(matches!(
            truncated_kraus_set(3, 1, 1.0),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(truncated_kraus_set(3, 4, 0.5).is_err());
    }

    #[test]
    fn damping_label_display_is_little_endian() {
        let label = DampingLabel::new(4, 0b0011).unwrap();
        // Qubit 0 leftmost: bits 0 and 1 are set.
        assert_eq!(label.bit_string(), "1100");
        assert!(DampingLabel::new(3, 8).is_err());
    }

    #[test]
    fn support_config_bounds() {
        let a = DampingLabel::new(5, 0b00011).unwrap();
        let b = DampingLabel::new(5, 0b00110).unwrap();
        let cfg = SupportConfig::of_pair(a, b);
        assert_eq!(cfg.left_weight, 2);
        assert_eq!(cfg.right_weight, 2);
        assert_eq!(cfg.union_size, 3);
        assert!(cfg.validate(5).is_ok());
        let bad = SupportConfig {
            left_weight: 2,
            right_weight: 2,
            union_size: 5,
        };
        assert!(bad.validate(5).is_err());
        let bad = SupportConfig {
            left_weight: 2,
            right_weight: 1,
            union_size: 1,
        };
        assert!(bad.validate(5).is_err());
    }

    #[test]
    fn truncation_defect_vanishes_for_complete_set() {
        let code = crate::code_space::build_custom_pi_code(
            1,
            [
                alloc::collections::BTreeMap::from([(0u32, num_rational::BigRational::from_integer(1.into()))]),
                alloc::collections::BTreeMap::from([(1u32, num_rational::BigRational::from_integer(1.into()))]),
            ],
        )
        .unwrap();
        let space = as_code_space(&code).unwrap();
        let omega = truncated_kraus_set(1, 1, 0.35).unwrap();
        assert_relative_eq!(truncation_defect(&space, &omega), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn truncation_defect_scales_at_one_past_the_kept_order() {
        let code = build_pi_code(1).unwrap();
        let space = as_code_space(&code).unwrap();
        let grid = geometric_grid(1e-3, 1e-1, 6);
        let defects: Vec<f64> = grid
            .iter()
            .map(|&g| truncation_defect(&space, &truncated_kraus_set(13, 1, g).unwrap()))
            .collect();
        assert!(defects.iter().all(|&d| d > 0.0 && d < 1.0));
        match log_log_fit(&grid, &defects).unwrap() {
            SlopeFit::Fitted { slope, .. } => {
                assert!(slope >= 1.9, "defect slope {slope} below t + 0.9");
            }
            SlopeFit::Exact => panic!("defect should be positive"),
        }
    }
}
