//! Code spaces for multi-qubit systems: sparse state vectors over bit-string
//! labels, Dicke states, and permutation-invariant codes with exact rational
//! weights.
//!
//! Bit labels are little-endian: bit `i` of a `u64` label holds the state of
//! qubit `i`. Displayed bit-strings put qubit 0 leftmost.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::comb::{binomial_ratio, weight_labels};
use crate::error::{Error, Result};

/// A state vector storing only its nonzero amplitudes.
///
/// Keys are basis labels below `2^m`; the map never stores an exact zero.
/// `BTreeMap` keeps iteration in label order, which makes every summation in
/// the library deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseStateVector {
    m: u32,
    amplitudes: BTreeMap<u64, Complex64>,
}

impl SparseStateVector {
    /// Empty (zero) vector on `m` qubits.
    pub fn zero(m: u32) -> Self {
        assert!(m <= 63, "labels are stored in u64");
        Self {
            m,
            amplitudes: BTreeMap::new(),
        }
    }

    /// Builds from `(label, amplitude)` pairs, dropping exact zeros.
    pub fn from_entries<I>(m: u32, entries: I) -> Self
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let mut v = Self::zero(m);
        for (label, amp) in entries {
            v.add_amplitude(label, amp);
        }
        v
    }

    /// Computational basis state `|label>`.
    pub fn basis(m: u32, label: u64) -> Self {
        Self::from_entries(m, [(label, Complex64::new(1.0, 0.0))])
    }

    pub fn qubits(&self) -> u32 {
        self.m
    }

    pub fn nnz(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, label: u64) -> Complex64 {
        self.amplitudes
            .get(&label)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amplitudes.iter().map(|(&l, &a)| (l, a))
    }

    /// Adds `amp` to the stored amplitude of `label`, culling exact zeros.
    pub fn add_amplitude(&mut self, label: u64, amp: Complex64) {
        debug_assert!(label < 1u64 << self.m, "label out of range");
        if amp == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.amplitudes.entry(label).or_insert(Complex64::new(0.0, 0.0));
        *entry += amp;
        if *entry == Complex64::new(0.0, 0.0) {
            self.amplitudes.remove(&label);
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        assert_eq!(self.m, other.m);
        for (label, amp) in other.iter() {
            self.add_amplitude(label, c * amp);
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            self.amplitudes.clear();
            return;
        }
        for amp in self.amplitudes.values_mut() {
            *amp *= c;
        }
    }

    /// Hermitian inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.m, other.m);
        // Merge-join over the two sorted label streams.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut left = self.amplitudes.iter();
        let mut right = other.amplitudes.iter();
        let mut a = left.next();
        let mut b = right.next();
        while let (Some((la, va)), Some((lb, vb))) = (a, b) {
            match la.cmp(lb) {
                core::cmp::Ordering::Less => a = left.next(),
                core::cmp::Ordering::Greater => b = right.next(),
                core::cmp::Ordering::Equal => {
                    acc += va.conj() * vb;
                    a = left.next();
                    b = right.next();
                }
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// Index of a Dicke state: `m` qubits with excitation number `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DickeLabel {
    pub m: u32,
    pub a: u32,
}

impl DickeLabel {
    pub fn new(m: u32, a: u32) -> Result<Self> {
        if a > m {
            return Err(Error::InvalidCode(format!(
                "excitation number {a} exceeds qubit count {m}"
            )));
        }
        Ok(Self { m, a })
    }
}

/// Uniform superposition of all weight-`a` labels on `m` qubits.
pub fn dicke_basis_vector(label: DickeLabel) -> SparseStateVector {
    let DickeLabel { m, a } = label;
    let labels = weight_labels(m, a);
    let amp = Complex64::new(1.0 / (labels.len() as f64).sqrt(), 0.0);
    SparseStateVector::from_entries(m, labels.into_iter().map(|l| (l, amp)))
}

/// A two-codeword permutation-invariant code, stored exactly.
///
/// `weights[j]` maps excitation number `b` to the rational weight of the
/// Dicke state `|D_{m,b}>` inside codeword `j`; only nonzero weights are
/// stored. Each row sums to one exactly and the two supports are disjoint.
/// `t` is the largest order for which the support avoids `(m - t, m]`; the
/// generated family has `t >= 1`, custom codes may have `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiCode {
    m: u32,
    t: u32,
    weights: [BTreeMap<u32, BigRational>; 2],
}

impl PiCode {
    pub fn qubits(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.t
    }

    /// Weight of Dicke level `b` in codeword `j` (zero when absent).
    pub fn weight(&self, j: usize, b: u32) -> BigRational {
        self.weights[j]
            .get(&b)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Nonzero weights of codeword `j` in increasing `b`.
    pub fn support(&self, j: usize) -> impl Iterator<Item = (u32, &BigRational)> + '_ {
        self.weights[j].iter().map(|(&b, w)| (b, w))
    }

    pub fn max_support(&self) -> u32 {
        self.weights
            .iter()
            .flat_map(|row| row.keys().copied())
            .max()
            .expect("non-empty support")
    }
}

/// Number of qubits used by the generated code family at order `t`.
pub fn family_qubits(t: u32) -> u32 {
    9 * t * t + 4 * t
}

/// Builds the order-`t` permutation-invariant code on `9t^2 + 4t` qubits.
///
/// The support sits on excitation numbers `b = 3t * i`; codeword `j` keeps
/// the levels with `i + j` even and weighs them by `C(3t+1, i) / 2^{3t}`.
pub fn build_pi_code(t: u32) -> Result<PiCode> {
    if t == 0 {
        return Err(Error::InvalidCode(format!(
            "code family needs order t >= 1"
        )));
    }
    let m = family_qubits(t);
    let spacing = 3 * t;
    let levels = 3 * t + 1;
    let denom = BigRational::from_integer(num_bigint::BigInt::from(1u64 << (3 * t)));
    let mut weights = [BTreeMap::new(), BTreeMap::new()];
    for i in 0..=levels {
        let j = (i % 2) as usize;
        let b = spacing * i;
        let w = binomial_ratio(levels as u64, i as u64) / denom.clone();
        weights[j].insert(b, w);
    }
    validate_pi_code(m, weights)
}

/// Builds a code from caller-supplied rational weights.
///
/// The rows must each sum to one exactly, be strictly positive where present,
/// have disjoint supports, and stay within `0..=m`. The order `t` is derived
/// as `m` minus the largest occupied excitation number.
pub fn build_custom_pi_code(
    m: u32,
    weights: [BTreeMap<u32, BigRational>; 2],
) -> Result<PiCode> {
    validate_pi_code(m, weights)
}

fn validate_pi_code(m: u32, raw: [BTreeMap<u32, BigRational>; 2]) -> Result<PiCode> {
    let mut weights = [BTreeMap::new(), BTreeMap::new()];
    for (j, row) in raw.into_iter().enumerate() {
        let mut total = BigRational::zero();
        for (b, w) in row {
            if b > m {
                return Err(Error::InvalidCode(format!(
                    "codeword {j} uses excitation number {b} on only {m} qubits"
                )));
            }
            if w.is_zero() {
                continue;
            }
            if w.is_negative() {
                return Err(Error::InvalidCode(format!(
                    "codeword {j} has a negative weight at level {b}"
                )));
            }
            total += &w;
            weights[j].insert(b, w);
        }
        if weights[j].is_empty() {
            return Err(Error::InvalidCode(format!(
                "codeword {j} has no support"
            )));
        }
        if !total.is_one() {
            return Err(Error::InvalidCode(format!(
                "codeword {j} weights sum to {total}, expected exactly 1"
            )));
        }
    }
    for b in weights[0].keys() {
        if weights[1].contains_key(b) {
            return Err(Error::InvalidCode(format!(
                "codeword supports overlap at excitation number {b}"
            )));
        }
    }
    let max_b = weights
        .iter()
        .flat_map(|row| row.keys().copied())
        .max()
        .expect("non-empty supports");
    let t = m - max_b;
    Ok(PiCode { m, t, weights })
}

/// Materializes codeword `j` as a sparse vector.
///
/// Per-label amplitudes are `sqrt(lambda_{j,b} / C(m,b))`, rounded to double
/// precision only at this point. The label count is the sum of `C(m, b)` over
/// the support, so callers should check [`codeword_label_count`] before
/// materializing large codes.
pub fn codeword(code: &PiCode, j: usize) -> SparseStateVector {
    assert!(j < 2);
    let mut v = SparseStateVector::zero(code.m);
    for (b, w) in code.support(j) {
        let ratio = w / binomial_ratio(code.m as u64, b as u64);
        let amp = Complex64::new(ratio.to_f64().expect("weight ratio fits f64").sqrt(), 0.0);
        for label in weight_labels(code.m, b) {
            v.add_amplitude(label, amp);
        }
    }
    v
}

/// Number of basis labels a materialized codeword would occupy.
pub fn codeword_label_count(code: &PiCode, j: usize) -> num_bigint::BigUint {
    use num_traits::Zero as _;
    let mut total = num_bigint::BigUint::zero();
    for (b, _) in code.support(j) {
        total += crate::comb::binomial(code.m as u64, b as u64);
    }
    total
}

/// An orthonormal family of codewords spanning a code space.
#[derive(Debug, Clone)]
pub struct CodeSpace {
    m: u32,
    codewords: Vec<SparseStateVector>,
    permutation_invariant: bool,
}

/// Pairwise orthonormality tolerance for code space construction.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

impl CodeSpace {
    /// Builds from explicit codewords, checking orthonormality.
    pub fn new(m: u32, codewords: Vec<SparseStateVector>) -> Result<Self> {
        Self::with_symmetry(m, codewords, false)
    }

    fn with_symmetry(
        m: u32,
        codewords: Vec<SparseStateVector>,
        permutation_invariant: bool,
    ) -> Result<Self> {
        if codewords.len() < 2 {
            return Err(Error::InvalidCode(format!(
                "a code space needs at least 2 codewords, got {}",
                codewords.len()
            )));
        }
        for (i, v) in codewords.iter().enumerate() {
            if v.qubits() != m {
                return Err(Error::InvalidCode(format!(
                    "codeword {i} lives on {} qubits, expected {m}",
                    v.qubits()
                )));
            }
            for (k, w) in codewords.iter().enumerate() {
                let expected = if i == k { 1.0 } else { 0.0 };
                let overlap = v.inner(w);
                let defect = (overlap - Complex64::new(expected, 0.0)).norm();
                if defect > ORTHONORMALITY_TOL {
                    return Err(Error::InvalidCode(format!(
                        "codewords {i} and {k} fail orthonormality by {defect:.3e}"
                    )));
                }
            }
        }
        Ok(Self {
            m,
            codewords,
            permutation_invariant,
        })
    }

    pub fn qubits(&self) -> u32 {
        self.m
    }

    /// Code dimension M.
    pub fn dim(&self) -> usize {
        self.codewords.len()
    }

    pub fn codeword(&self, j: usize) -> &SparseStateVector {
        &self.codewords[j]
    }

    pub fn codewords(&self) -> &[SparseStateVector] {
        &self.codewords
    }

    /// True when built from a permutation-invariant code, enabling the
    /// orbit-grouped summation paths.
    pub fn is_permutation_invariant(&self) -> bool {
        self.permutation_invariant
    }
}

/// Materializes both codewords of `code` as a [`CodeSpace`].
pub fn as_code_space(code: &PiCode) -> Result<CodeSpace> {
    let words = alloc::vec![codeword(code, 0), codeword(code, 1)];
    CodeSpace::with_symmetry(code.m, words, true)
}
