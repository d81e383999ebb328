//! Truncated projective recovery for a family of channel effects.
//!
//! Each effect `F` maps the code space onto a polar support with projector
//! `Pi_F`; the recovery operator is `R_F = S_F Pi F†` with
//! `S_F = (Pi F† F Pi)^{-1/2}`. When the polar supports are orthogonal the
//! recovery is trace non-increasing as is; otherwise every fidelity is
//! rescaled by `(1 + eta)` with `eta` bounding the overlap.
//!
//! The family is either the raw truncated effect set or the rotation of it
//! that diagonalizes the block averages. For permutation-invariant codes the
//! raw supports overlap heavily while the rotated ones are orthogonal to
//! machine precision, so recovery quality depends on the choice; both are
//! available and measured by the same defect.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{apply_damping, DampingLabel, TruncatedKrausSet};
use crate::code_space::{CodeSpace, SparseStateVector};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, lambda_max, pseudo_inverse_sqrt, spectral_norm, InverseSqrt,
};
use crate::perturbed_kl::DiagonalizedKL;

/// Eigenvalues below `rank_tol * lambda_max` of a block are treated as zero
/// when inverting.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Slack allowed on the projector-sum norm check.
pub const TRACE_BOUND_TOL: f64 = 1e-10;

/// A set of effects given as linear combinations of truncated damping
/// operators.
#[derive(Debug, Clone)]
pub struct EffectFamily {
    omega: TruncatedKrausSet,
    /// Row `f` holds the expansion of effect `f` over the raw labels.
    coefficients: DMatrix<Complex64>,
    diagonalized: bool,
}

impl EffectFamily {
    /// The truncated damping operators themselves.
    pub fn raw(omega: TruncatedKrausSet) -> Self {
        let n = omega.len();
        Self {
            omega,
            coefficients: DMatrix::identity(n, n),
            diagonalized: false,
        }
    }

    /// The rotated family whose block averages are diagonal.
    pub fn diagonalized(omega: TruncatedKrausSet, diag: &DiagonalizedKL) -> Result<Self> {
        if diag.v().nrows() != omega.len() {
            return Err(Error::DimensionMismatch {
                expected: omega.len(),
                got: diag.v().nrows(),
            });
        }
        Ok(Self {
            coefficients: diag.v().clone(),
            omega,
            diagonalized: true,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn qubits(&self) -> u32 {
        self.omega.qubits()
    }

    pub fn gamma(&self) -> f64 {
        self.omega.gamma()
    }

    pub fn is_diagonalized(&self) -> bool {
        self.diagonalized
    }

    pub fn raw_labels(&self) -> &[DampingLabel] {
        self.omega.labels()
    }

    pub fn coefficient(&self, f: usize, j: usize) -> Complex64 {
        self.coefficients[(f, j)]
    }

    /// Applies effect `f` to a state.
    pub fn apply(&self, f: usize, state: &SparseStateVector) -> SparseStateVector {
        let mut out = SparseStateVector::zero(self.qubits());
        for j in 0..self.len() {
            let c = self.coefficients[(f, j)];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            out.add_scaled(c, &apply_damping(self.omega.label(j), self.gamma(), state));
        }
        out
    }
}

/// The factored recovery `R_F = S_F Pi F†` for every effect in a family.
#[derive(Debug, Clone)]
pub struct RecoveryMap {
    codeword_count: usize,
    /// `effect_states[f][beta] = F |beta_L>`.
    effect_states: Vec<Vec<SparseStateVector>>,
    /// `Pi F† F Pi` in the logical basis.
    blocks: Vec<DMatrix<Complex64>>,
    inverse_sqrts: Vec<InverseSqrt>,
    min_block_eigenvalues: Vec<f64>,
    /// `Pi F† F' Pi` for every ordered pair, row-major over `(f, fp)`.
    cross_blocks: Vec<DMatrix<Complex64>>,
    defect: f64,
    eta: f64,
}

/// Builds the recovery for each effect of the family on the given code.
///
/// Fails with [`Error::SingularEffect`] when an effect annihilates the whole
/// code space; the rank tolerance handles near-singular blocks by dropping
/// directions below `rank_tol * lambda_max`.
pub fn build_truncated_recovery(
    space: &CodeSpace,
    family: &EffectFamily,
    rank_tol: f64,
) -> Result<RecoveryMap> {
    if space.qubits() != family.qubits() {
        return Err(Error::DimensionMismatch {
            expected: space.qubits() as usize,
            got: family.qubits() as usize,
        });
    }
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidCode(alloc::format!(
            "rank tolerance {rank_tol} must lie in (0, 1)"
        )));
    }
    let n = family.len();
    let m_words = space.dim();

    let mut effect_states = Vec::with_capacity(n);
    for f in 0..n {
        let per_word: Vec<_> = space
            .codewords()
            .iter()
            .map(|w| family.apply(f, w))
            .collect();
        effect_states.push(per_word);
    }

    let block_of = |a: &[SparseStateVector], b: &[SparseStateVector]| {
        DMatrix::from_fn(m_words, m_words, |alpha, beta| a[alpha].inner(&b[beta]))
    };

    let mut blocks = Vec::with_capacity(n);
    let mut inverse_sqrts = Vec::with_capacity(n);
    let mut min_block_eigenvalues = Vec::with_capacity(n);
    for f in 0..n {
        let block = block_of(&effect_states[f], &effect_states[f]);
        let eigen = hermitian_eigen(&block)?;
        min_block_eigenvalues.push(eigen.values[0]);
        let inv = pseudo_inverse_sqrt(&block, rank_tol)?;
        if inv.rank == 0 {
            return Err(Error::SingularEffect { index: f });
        }
        blocks.push(block);
        inverse_sqrts.push(inv);
    }

    let mut cross_blocks = Vec::with_capacity(n * n);
    for f in 0..n {
        for fp in 0..n {
            cross_blocks.push(block_of(&effect_states[f], &effect_states[fp]));
        }
    }

    let mut defect = 0.0f64;
    for f in 0..n {
        for fp in 0..n {
            if f == fp {
                continue;
            }
            let overlap =
                &inverse_sqrts[f].matrix * &cross_blocks[f * n + fp] * &inverse_sqrts[fp].matrix;
            defect = defect.max(spectral_norm(&overlap));
        }
    }
    let eta = (n * n) as f64 * defect;

    Ok(RecoveryMap {
        codeword_count: m_words,
        effect_states,
        blocks,
        inverse_sqrts,
        min_block_eigenvalues,
        cross_blocks,
        defect,
        eta,
    })
}

impl RecoveryMap {
    pub fn effect_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn codeword_count(&self) -> usize {
        self.codeword_count
    }

    /// `max_{F != F'} || S_F (Pi F† F' Pi) S_F' ||_2`, the overlap between
    /// distinct polar supports.
    pub fn orthogonality_defect(&self) -> f64 {
        self.defect
    }

    /// Rescaling parameter `|family|^2 * defect`; fidelities downstream are
    /// divided by `1 + eta`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn block(&self, f: usize) -> &DMatrix<Complex64> {
        &self.blocks[f]
    }

    pub fn cross_block(&self, f: usize, fp: usize) -> &DMatrix<Complex64> {
        &self.cross_blocks[f * self.blocks.len() + fp]
    }

    /// The pseudo-inverse square root `S_F`.
    pub fn s_matrix(&self, f: usize) -> &DMatrix<Complex64> {
        &self.inverse_sqrts[f].matrix
    }

    pub fn rank(&self, f: usize) -> usize {
        self.inverse_sqrts[f].rank
    }

    pub fn min_block_eigenvalue(&self, f: usize) -> f64 {
        self.min_block_eigenvalues[f]
    }

    pub fn effect_state(&self, f: usize, beta: usize) -> &SparseStateVector {
        &self.effect_states[f][beta]
    }

    /// Overlap `J_{l,i} = <F l_L | i_L>` between damped and undamped words.
    pub fn code_overlap_matrix(&self, space: &CodeSpace, f: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.codeword_count, self.codeword_count, |l, i| {
            self.effect_states[f][l].inner(space.codeword(i))
        })
    }
}

/// Gram matrix of the orthonormal frames spanning all polar supports.
///
/// Rows and columns run over `(f, l)` with `l` below the rank of effect `f`;
/// the frame vector is `lambda_l^{-1/2} sum_beta (u_l)_beta F |beta_L>`.
pub fn polar_support_gram(rm: &RecoveryMap) -> DMatrix<Complex64> {
    let n = rm.effect_count();
    let total: usize = (0..n).map(|f| rm.rank(f)).sum();
    let mut slots = Vec::with_capacity(total);
    for f in 0..n {
        for l in 0..rm.rank(f) {
            slots.push((f, l));
        }
    }
    DMatrix::from_fn(total, total, |row, col| {
        let (f, l) = slots[row];
        let (fp, lp) = slots[col];
        let left = &rm.inverse_sqrts[f];
        let right = &rm.inverse_sqrts[fp];
        let cross = rm.cross_block(f, fp);
        let u = left.retained_vectors.column(l);
        let up = right.retained_vectors.column(lp);
        let mut acc = Complex64::new(0.0, 0.0);
        for alpha in 0..rm.codeword_count {
            for beta in 0..rm.codeword_count {
                acc += u[alpha].conj() * cross[(alpha, beta)] * up[beta];
            }
        }
        acc / Complex64::new((left.retained_values[l] * right.retained_values[lp]).sqrt(), 0.0)
    })
}

/// Spectral norm of the projector sum `sum_F Pi_F` from a support Gram.
pub fn projector_sum_norm(gram: &DMatrix<Complex64>) -> Result<f64> {
    lambda_max(gram)
}

/// Computes `|| sum_F Pi_F ||_2` and checks it against `1 + eta`.
///
/// A violation beyond [`TRACE_BOUND_TOL`] means the overlap bound itself is
/// wrong somewhere, so it is escalated as an error rather than a value.
pub fn trace_bound_check(rm: &RecoveryMap) -> Result<f64> {
    let gram = polar_support_gram(rm);
    let norm = projector_sum_norm(&gram)?;
    let allowed = 1.0 + rm.eta() + TRACE_BOUND_TOL;
    if norm > allowed {
        return Err(Error::BoundViolated { norm, allowed });
    }
    Ok(norm)
}

/// Sum over effects of the smallest code-diagonal eigenvalue of
/// `Pi F† F Pi`; a recovery-free fidelity floor.
pub fn leung_lower_bound(rm: &RecoveryMap) -> f64 {
    rm.min_block_eigenvalues.iter().sum()
}

/// Density-matrix tolerance on the trace.
pub const DENSITY_TRACE_TOL: f64 = 1e-12;

/// Density-matrix tolerance on negative eigenvalues.
pub const DENSITY_EIGEN_TOL: f64 = 1e-12;

/// A density operator expressed in the codeword basis.
#[derive(Debug, Clone)]
pub struct DensityOnCode {
    matrix: DMatrix<Complex64>,
}

impl DensityOnCode {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if crate::linalg::hermiticity_defect(&matrix) > crate::linalg::HERMITICITY_TOL {
            return Err(Error::NotHermitian);
        }
        let trace: f64 = (0..matrix.nrows()).map(|i| matrix[(i, i)].re).sum();
        if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::TraceNotOne { trace });
        }
        let eigen = hermitian_eigen(&matrix)?;
        if eigen.values[0] < -DENSITY_EIGEN_TOL {
            return Err(Error::NotPositiveSemidefinite {
                lambda_min: eigen.values[0],
            });
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        Self {
            matrix: DMatrix::from_diagonal_element(dim, dim, w),
        }
    }

    pub fn pure(dim: usize, word: usize) -> Self {
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(word, word)] = Complex64::new(1.0, 0.0);
        Self { matrix }
    }

    /// Qubit-like density `(I + x X + y Y + z Z)/2` for two codewords.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if r > 1.0 + 1e-12 {
            return Err(Error::BlochVectorTooLong { norm: r });
        }
        let h = Complex64::new(0.5, 0.0);
        let matrix = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0 + z, 0.0) * h,
                Complex64::new(x, -y) * h,
                Complex64::new(x, y) * h,
                Complex64::new(1.0 - z, 0.0) * h,
            ],
        );
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Eigenvalues ascending; the mixture weights of the state.
    pub fn eigen_weights(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(&self.matrix)?.values)
    }
}
