//! Small dense linear algebra helpers shared by the certification modules.
//!
//! Everything here operates on `nalgebra` dynamic matrices over `Complex<f64>`.
//! Matrices are tiny (code dimension M, or the truncated effect count), so the
//! default pure-Rust decompositions are more than fast enough.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerance for treating a matrix as Hermitian relative to its scale.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Largest absolute entry of `a - a.adjoint()`.
pub fn hermiticity_defect(a: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in ascending order together with the matching
/// orthonormal eigenvectors (as columns). Ties keep the order produced by the
/// underlying solver, so the output is deterministic for a fixed input.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DMatrix<Complex64>,
}

/// Decomposes `(a + a†)/2`, failing if `a` is visibly non-Hermitian.
pub fn hermitian_eigen(a: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    if hermiticity_defect(a) > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian);
    }
    // Symmetrize so rounding in the caller cannot push the solver off the
    // Hermitian manifold.
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Spectral norm (largest singular value) of a complex matrix.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    // sigma_max(A)^2 = lambda_max(A† A); A† A is Hermitian PSD by construction.
    let gram = a.adjoint() * a;
    let eig = gram.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v))
        .max(0.0)
        .sqrt()
}

/// Hermitian pseudo-inverse square root `(a)^{-1/2}` restricted to the
/// eigenspaces with eigenvalue above `rank_tol * lambda_max`.
///
/// Returns the matrix, the retained rank, and the retained eigenpairs
/// (ascending), which callers reuse to span the support of `a`.
#[derive(Debug, Clone)]
pub struct InverseSqrt {
    pub matrix: DMatrix<Complex64>,
    pub rank: usize,
    pub retained_values: Vec<f64>,
    /// Column `k` spans the support direction for `retained_values[k]`.
    pub retained_vectors: DMatrix<Complex64>,
}

pub fn pseudo_inverse_sqrt(a: &DMatrix<Complex64>, rank_tol: f64) -> Result<InverseSqrt> {
    let eig = hermitian_eigen(a)?;
    let n = eig.values.len();
    let lambda_max = eig.values.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let cutoff = rank_tol * lambda_max;
    let retained: Vec<usize> = (0..n).filter(|&i| eig.values[i] > cutoff).collect();
    let rank = retained.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    let mut retained_values = Vec::with_capacity(rank);
    let mut retained_vectors = DMatrix::<Complex64>::zeros(n, rank);
    for (dst, &i) in retained.iter().enumerate() {
        let v = eig.vectors.column(i);
        let w = Complex64::new(1.0 / eig.values[i].sqrt(), 0.0);
        // matrix += w * v v†
        for r in 0..n {
            for c in 0..n {
                matrix[(r, c)] += w * v[r] * v[c].conj();
            }
        }
        retained_values.push(eig.values[i]);
        retained_vectors.set_column(dst, &v);
    }
    Ok(InverseSqrt {
        matrix,
        rank,
        retained_values,
        retained_vectors,
    })
}

/// Projects a Hermitian matrix onto the density-matrix set
/// (positive semidefinite, unit trace) in Frobenius norm.
pub fn project_to_density(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = hermitian_eigen(a)?;
    let probs = project_to_simplex(&eig.values);
    let n = eig.values.len();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        if probs[k] == 0.0 {
            continue;
        }
        let v = eig.vectors.column(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += Complex64::new(probs[k], 0.0) * v[r] * v[c].conj();
            }
        }
    }
    Ok(out)
}

/// Euclidean projection of a real vector onto the probability simplex.
pub fn project_to_simplex(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    (0..n).map(|i| (x[i] - theta).max(0.0)).collect()
}

/// Inner product `tr(a† b)` of two matrices of equal shape.
pub fn frobenius_inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

/// `tr(a b)` for square matrices of equal size.
pub fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest eigenvalue of a Hermitian matrix, or 0 for an empty one.
pub fn lambda_max(a: &DMatrix<Complex64>) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let eig = hermitian_eigen(a)?;
    Ok(*eig.values.last().expect("non-empty spectrum"))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(a: &DMatrix<Complex64>) -> Result<f64> {
    let eig = hermitian_eigen(a)?;
    eig.values
        .first()
        .copied()
        .ok_or_else(|| Error::EmptyMatrix)
}

/// Builds a column vector from a slice of complex entries.
pub fn column(entries: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(entries)
}
