//! Entanglement fidelity of damping followed by truncated recovery.
//!
//! For recovery operators `R_A = S_A Pi Ã_A†` and the full damping channel
//! with one Kraus operator per label `B`, the entanglement fidelity of a code
//! state `rho` is
//!
//! ```text
//!     F(rho) = sum_{A,B} |tr(S_A K^{A,B} rho)|^2 / (1 + eta),
//!     K^{A,B}_{y,z} = <Ã_A y_L | A_B z_L>,
//! ```
//!
//! a quadratic form in `rho`. The module assembles the form coefficients once
//! so that evaluation, gradients, and worst-case minimization all run on a
//! small dense matrix no matter how many qubits the code uses.
//!
//! The sum over the `2^m` damping labels is the only large piece. For
//! permutation-invariant codewords a permutation fixing the supports of both
//! truncated labels in a pair maps `B` to an equivalent label, so labels are
//! grouped into orbits keyed by their restriction to the pair support and
//! their outside weight. The literal label-by-label sum stays available as an
//! oracle for the grouped one.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{apply_damping, DampingLabel};
use crate::code_space::{CodeSpace, SparseStateVector};
use crate::comb::{binomial_f64, lowest_bits_outside};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, project_to_density};
use crate::recovery::{DensityOnCode, EffectFamily, RecoveryMap};

/// Largest qubit count accepted by the literal label sweep.
pub const LITERAL_SUM_MAX_QUBITS: u32 = 20;

/// Default stationarity tolerance for the worst-case search.
pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-10;

/// Default iteration cap for the worst-case search.
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

/// How the sum over damping labels is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSumPath {
    /// Group labels into orbits of permutations fixing each pair support.
    OrbitGrouped,
    /// Visit every label; exponential in the qubit count.
    Literal,
}

/// The fidelity quadratic form on code-space densities.
///
/// With the flat index `(x, z) -> x * M + z`,
/// `F(rho) = Re(sum q_{(xz),(x'z')} rho_{z,x} conj(rho_{z',x'})) / (1 + eta)`.
#[derive(Debug, Clone)]
pub struct FidelityForm {
    codeword_count: usize,
    q: DMatrix<Complex64>,
    eta: f64,
}

impl FidelityForm {
    /// Builds the form whose value is `sum_i |tr(X_i rho)|^2 / (1 + eta)`.
    pub fn from_trace_matrices(mats: &[DMatrix<Complex64>], eta: f64) -> Result<Self> {
        let mm = match mats.first() {
            Some(first) => first.nrows(),
            None => return Err(Error::EmptyMatrix),
        };
        let dim = mm * mm;
        let mut q = DMatrix::zeros(dim, dim);
        for x in mats {
            if x.nrows() != mm || x.ncols() != mm {
                return Err(Error::DimensionMismatch {
                    expected: mm,
                    got: x.nrows(),
                });
            }
            let v = flatten(x);
            q += &v * v.adjoint();
        }
        Ok(Self {
            codeword_count: mm,
            q,
            eta,
        })
    }

    /// The same numerator with a different rescaling parameter.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn codeword_count(&self) -> usize {
        self.codeword_count
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn coefficients(&self) -> &DMatrix<Complex64> {
        &self.q
    }

    pub fn evaluate(&self, rho: &DensityOnCode) -> f64 {
        self.evaluate_matrix(rho.matrix())
    }

    /// Evaluates the form on an arbitrary matrix in the codeword basis.
    pub fn evaluate_matrix(&self, rho: &DMatrix<Complex64>) -> f64 {
        let mm = self.codeword_count;
        let mut val = Complex64::new(0.0, 0.0);
        for x in 0..mm {
            for z in 0..mm {
                let left = rho[(z, x)];
                if left == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for xp in 0..mm {
                    for zp in 0..mm {
                        val += self.q[(x * mm + z, xp * mm + zp)] * left * rho[(zp, xp)].conj();
                    }
                }
            }
        }
        debug_assert!(val.im.abs() <= 1e-8 * (1.0 + val.re.abs()), "im {}", val.im);
        val.re / (1.0 + self.eta)
    }

    /// Euclidean gradient at a Hermitian point: `dF = tr(grad * drho)` for
    /// Hermitian perturbations.
    pub fn gradient_matrix(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mm = self.codeword_count;
        let mut gmat = DMatrix::zeros(mm, mm);
        for x in 0..mm {
            for z in 0..mm {
                let mut acc = Complex64::new(0.0, 0.0);
                for xp in 0..mm {
                    for zp in 0..mm {
                        acc += self.q[(x * mm + z, xp * mm + zp)] * rho[(zp, xp)].conj();
                    }
                }
                gmat[(x, z)] = acc;
            }
        }
        (&gmat + gmat.adjoint()) / Complex64::new(1.0 + self.eta, 0.0)
    }
}

/// Row-major flattening `(y, z) -> y * M + z` of a square matrix.
fn flatten(k: &DMatrix<Complex64>) -> DVector<Complex64> {
    let mm = k.nrows();
    DVector::from_fn(mm * mm, |r, _| k[(r / mm, r % mm)])
}

fn raw_damped_codewords(space: &CodeSpace, family: &EffectFamily) -> Vec<Vec<SparseStateVector>> {
    family
        .raw_labels()
        .iter()
        .map(|&label| {
            space
                .codewords()
                .iter()
                .map(|w| apply_damping(label, family.gamma(), w))
                .collect()
        })
        .collect()
}

/// `k[(y, z)] = <bra_y | ket_z>`.
fn overlap_matrix(bra: &[SparseStateVector], ket: &[SparseStateVector]) -> DMatrix<Complex64> {
    DMatrix::from_fn(bra.len(), ket.len(), |y, z| bra[y].inner(&ket[z]))
}

/// `z[f * n + fp]` accumulates
/// `sum_B K^{f,B} (x) conj(K^{fp,B})` over all `2^m` damping labels `B`,
/// flattened so rows are `(y, z)` of the first factor.
fn label_sum_orbit(
    space: &CodeSpace,
    family: &EffectFamily,
) -> Vec<DMatrix<Complex64>> {
    let m = space.qubits();
    let gamma = family.gamma();
    let n = family.len();
    let mm = space.dim();
    let raw = raw_damped_codewords(space, family);
    let mut cache: BTreeMap<u64, Vec<SparseStateVector>> = BTreeMap::new();
    let mut z = vec![DMatrix::zeros(mm * mm, mm * mm); n * n];
    for f in 0..n {
        for fp in 0..n {
            let u = family.raw_labels()[f].bits() | family.raw_labels()[fp].bits();
            let free = m - u.count_ones();
            let mut sub = u;
            loop {
                for w_out in 0..=free {
                    let rep = sub | lowest_bits_outside(u, m, w_out);
                    let states = cache.entry(rep).or_insert_with(|| {
                        let label = DampingLabel::new(m, rep).expect("orbit representative");
                        space
                            .codewords()
                            .iter()
                            .map(|w| apply_damping(label, gamma, w))
                            .collect()
                    });
                    if states.iter().all(|st| st.nnz() == 0) {
                        continue;
                    }
                    let size = binomial_f64(free as u64, w_out as u64);
                    let vf = flatten(&overlap_matrix(&raw[f], states));
                    let vfp = flatten(&overlap_matrix(&raw[fp], states));
                    z[f * n + fp] += (&vf * vfp.adjoint()) * Complex64::new(size, 0.0);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & u;
            }
        }
    }
    z
}

fn label_sum_literal(
    space: &CodeSpace,
    family: &EffectFamily,
) -> Result<Vec<DMatrix<Complex64>>> {
    let m = space.qubits();
    if m > LITERAL_SUM_MAX_QUBITS {
        return Err(Error::LiteralSumTooLarge {
            qubits: m,
            max: LITERAL_SUM_MAX_QUBITS,
        });
    }
    let gamma = family.gamma();
    let n = family.len();
    let mm = space.dim();
    let raw = raw_damped_codewords(space, family);
    let mut z = vec![DMatrix::zeros(mm * mm, mm * mm); n * n];
    for bits in 0..(1u64 << m) {
        let label = DampingLabel::new(m, bits).expect("label below 2^m");
        let states: Vec<_> = space
            .codewords()
            .iter()
            .map(|w| apply_damping(label, gamma, w))
            .collect();
        if states.iter().all(|st| st.nnz() == 0) {
            continue;
        }
        let vs: Vec<_> = (0..n)
            .map(|j| flatten(&overlap_matrix(&raw[j], &states)))
            .collect();
        for f in 0..n {
            for fp in 0..n {
                z[f * n + fp] += &vs[f] * vs[fp].adjoint();
            }
        }
    }
    Ok(z)
}

/// Assembles the fidelity form for a recovery built on the same family.
pub fn fidelity_form(
    space: &CodeSpace,
    family: &EffectFamily,
    rm: &RecoveryMap,
    path: ChannelSumPath,
) -> Result<FidelityForm> {
    if family.qubits() != space.qubits() {
        return Err(Error::DimensionMismatch {
            expected: space.qubits() as usize,
            got: family.qubits() as usize,
        });
    }
    if rm.effect_count() != family.len() {
        return Err(Error::DimensionMismatch {
            expected: family.len(),
            got: rm.effect_count(),
        });
    }
    if rm.codeword_count() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: rm.codeword_count(),
        });
    }
    let z = match path {
        ChannelSumPath::OrbitGrouped => label_sum_orbit(space, family),
        ChannelSumPath::Literal => label_sum_literal(space, family)?,
    };
    let n = family.len();
    let mm = space.dim();
    let dim = mm * mm;
    let eye = DMatrix::<Complex64>::identity(mm, mm);
    let mut q = DMatrix::zeros(dim, dim);
    for a in 0..n {
        // Fold the family coefficients: the label sums are stored per raw
        // pair, the recovery conjugates by the combined effect.
        let mut w = DMatrix::zeros(dim, dim);
        for f in 0..n {
            for fp in 0..n {
                let c = family.coefficient(a, f).conj() * family.coefficient(a, fp);
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                w += &z[f * n + fp] * c;
            }
        }
        // S_A acts on the bra slot of each trace matrix.
        let ts = rm.s_matrix(a).kronecker(&eye);
        q += &ts * w * ts.adjoint();
    }
    Ok(FidelityForm {
        codeword_count: mm,
        q,
        eta: rm.eta(),
    })
}

pub fn entanglement_fidelity(form: &FidelityForm, rho: &DensityOnCode) -> f64 {
    form.evaluate(rho)
}

/// Outcome of the worst-case search.
#[derive(Debug, Clone)]
pub struct WorstCase {
    pub value: f64,
    pub minimizer: DMatrix<Complex64>,
    pub iterations: usize,
}

/// Minimizes the fidelity over density matrices by projected gradient
/// descent.
///
/// The form is convex, so the projected stationary point is the global
/// minimum. Stationarity is measured by the gradient mapping at unit
/// reference step; backtracking enforces the quadratic upper bound
/// `f(y) <= f(x) + <g, y - x> + |y - x|^2 / (2 s)`.
pub fn worst_case_fidelity(
    form: &FidelityForm,
    tol: f64,
    max_iterations: usize,
) -> Result<WorstCase> {
    let mm = form.codeword_count();
    let mut x = DMatrix::from_diagonal_element(mm, mm, Complex64::new(1.0 / mm as f64, 0.0));
    let mut step = 1.0_f64;
    for it in 0..max_iterations {
        let g = form.gradient_matrix(&x);
        let reference = project_to_density(&(&x - &g))?;
        if (&x - &reference).norm() <= tol {
            return Ok(WorstCase {
                value: form.evaluate_matrix(&x),
                minimizer: x,
                iterations: it,
            });
        }
        let fx = form.evaluate_matrix(&x);
        loop {
            let cand = project_to_density(&(&x - &g * Complex64::new(step, 0.0)))?;
            let d = &cand - &x;
            let dn2 = d.norm_squared();
            let lin = frobenius_inner(&g, &d).re;
            if form.evaluate_matrix(&cand) <= fx + lin + dn2 / (2.0 * step) + 1e-15 {
                x = cand;
                step = (step * 2.0).min(1e6);
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                // The model cannot be satisfied at any step; the outer
                // stationarity test will settle it next pass.
                break;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
    })
}

/// Minimum of the form over a Bloch-ball grid; two-codeword spaces only.
#[derive(Debug, Clone, Copy)]
pub struct BlochMinimum {
    pub value: f64,
    pub point: [f64; 3],
}

pub fn bloch_grid_minimum(form: &FidelityForm, per_axis: usize) -> Result<BlochMinimum> {
    if form.codeword_count() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: form.codeword_count(),
        });
    }
    if per_axis < 2 {
        return Err(Error::InsufficientGrid {
            points: per_axis,
            required: 2,
        });
    }
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64;
    let mut best = BlochMinimum {
        value: f64::INFINITY,
        point: [0.0; 3],
    };
    for ix in 0..per_axis {
        let x = coord(ix);
        for iy in 0..per_axis {
            let y = coord(iy);
            for iz in 0..per_axis {
                let zc = coord(iz);
                if x * x + y * y + zc * zc > 1.0 {
                    continue;
                }
                let rho = DensityOnCode::from_bloch(x, y, zc)?;
                let value = form.evaluate(&rho);
                if value < best.value {
                    best = BlochMinimum {
                        value,
                        point: [x, y, zc],
                    };
                }
            }
        }
    }
    Ok(best)
}
