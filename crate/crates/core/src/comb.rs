//! Exact combinatorics: binomial coefficients over big integers and
//! enumeration of fixed-weight bit labels.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact binomial coefficient `C(n, k)`.
///
/// Returns zero for `k > n`, matching the combinatorial convention used by
/// the moment sums.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Multiply before dividing; the running product of i+1 consecutive
        // integers is divisible by (i+1)!.
        acc = acc * BigUint::from(n - k + i + 1) / BigUint::from(i + 1);
    }
    acc
}

/// `C(n, k)` as a signed big integer, for use inside rational arithmetic.
pub fn binomial_int(n: u64, k: u64) -> BigInt {
    BigInt::from(binomial(n, k))
}

/// `C(n, k)` as an exact rational.
pub fn binomial_ratio(n: u64, k: u64) -> BigRational {
    BigRational::from_integer(binomial_int(n, k))
}

/// `C(n, k)` rounded to floating point.
///
/// Callers only use this where the coefficient fits comfortably below 2^53.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().expect("binomial magnitude")
}

/// Exact factorial `n!`.
pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

/// All `m`-bit labels of Hamming weight `a`, in increasing numeric order.
pub fn weight_labels(m: u32, a: u32) -> Vec<u64> {
    assert!(m <= 63, "labels are stored in u64");
    assert!(a <= m);
    let mut out = Vec::new();
    if a == 0 {
        out.push(0);
        return out;
    }
    // Gosper's hack: next integer with the same popcount.
    let limit: u64 = 1u64 << m;
    let mut v: u64 = (1u64 << a) - 1;
    while v < limit {
        out.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
        if c == 0 {
            break;
        }
    }
    out
}

/// Lowest `k` set bits chosen from the zero bits of `mask`, as a label.
///
/// Used to pick canonical orbit representatives outside a support set.
pub fn lowest_bits_outside(mask: u64, m: u32, k: u32) -> u64 {
    let mut out = 0u64;
    let mut remaining = k;
    for bit in 0..m {
        if remaining == 0 {
            break;
        }
        let b = 1u64 << bit;
        if mask & b == 0 {
            out |= b;
            remaining -= 1;
        }
    }
    assert_eq!(remaining, 0, "not enough free positions");
    out
}
