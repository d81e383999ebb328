//! Perturbed Knill-Laflamme data for a truncated effect set, and the
//! closed-form fidelity lower bound derived from it.
//!
//! For a code space and a set of effects `Omega`, the central object is the
//! table of matrix elements `<alpha| A†B |beta>`. Exact correctability would
//! make every block a multiple of the identity; the deviation from that
//! shape is the perturbation `eps`, and the block averages assemble into a
//! Hermitian Gram matrix `G` whose spectrum controls how much fidelity a
//! truncated recovery can guarantee.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{SupportConfig, TruncatedKrausSet};
use crate::code_space::{CodeSpace, PiCode};
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, validate_grid, SlopeFit};
use crate::linalg::{hermitian_eigen, hermiticity_defect};
use crate::pi_ad_codes::pi_matrix_element;

/// Conjugate-symmetry tolerance for assembled block tables.
pub const CONJUGATE_SYMMETRY_TOL: f64 = 1e-12;

/// Residual tolerance for the diagonalization consistency checks.
pub const DIAGONALIZATION_TOL: f64 = 1e-10;

fn block_index(n: usize, m_words: usize, a: usize, b: usize, alpha: usize, beta: usize) -> usize {
    debug_assert!(a < n && b < n && alpha < m_words && beta < m_words);
    ((a * n + b) * m_words + alpha) * m_words + beta
}

/// All matrix elements `<alpha| A†B |beta>` for `A, B` in a fixed effect
/// list, stored densely.
#[derive(Debug, Clone)]
pub struct GramBlockTable {
    m: u32,
    gamma: f64,
    codeword_count: usize,
    effect_count: usize,
    entries: Vec<Complex64>,
}

impl GramBlockTable {
    /// Wraps raw entries laid out as `((a*n + b)*M + alpha)*M + beta`,
    /// validating the shape and conjugate symmetry.
    pub fn from_entries(
        m: u32,
        gamma: f64,
        effect_count: usize,
        codeword_count: usize,
        entries: Vec<Complex64>,
    ) -> Result<Self> {
        let expected = effect_count * effect_count * codeword_count * codeword_count;
        if entries.len() != expected {
            return Err(Error::TableShape {
                expected,
                got: entries.len(),
            });
        }
        let table = Self {
            m,
            gamma,
            codeword_count,
            effect_count,
            entries,
        };
        let defect = table.conjugate_symmetry_defect();
        if defect > CONJUGATE_SYMMETRY_TOL {
            return Err(Error::ConjugateSymmetryViolated { defect });
        }
        Ok(table)
    }

    pub fn qubits(&self) -> u32 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn codeword_count(&self) -> usize {
        self.codeword_count
    }

    pub fn effect_count(&self) -> usize {
        self.effect_count
    }

    pub fn entry(&self, a: usize, b: usize, alpha: usize, beta: usize) -> Complex64 {
        self.entries[block_index(self.effect_count, self.codeword_count, a, b, alpha, beta)]
    }

    /// Largest violation of `entry(A,B,alpha,beta) = conj(entry(B,A,beta,alpha))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.effect_count {
            for b in 0..self.effect_count {
                for alpha in 0..self.codeword_count {
                    for beta in 0..self.codeword_count {
                        let lhs = self.entry(a, b, alpha, beta);
                        let rhs = self.entry(b, a, beta, alpha).conj();
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Builds the block table by applying each effect to each codeword and
/// taking sparse inner products.
pub fn gram_blocks_sparse(space: &CodeSpace, omega: &TruncatedKrausSet) -> Result<GramBlockTable> {
    if space.qubits() != omega.qubits() {
        return Err(Error::InvalidCode(alloc::format!(
            "effect set acts on {} qubits, code on {}",
            omega.qubits(),
            space.qubits()
        )));
    }
    let n = omega.len();
    let m_words = space.dim();
    // Damped codewords reused across all pairs.
    let mut damped = Vec::with_capacity(n);
    for idx in 0..n {
        let per_word: Vec<_> = space
            .codewords()
            .iter()
            .map(|w| omega.apply(idx, w))
            .collect();
        damped.push(per_word);
    }
    let mut entries = Vec::with_capacity(n * n * m_words * m_words);
    for a in 0..n {
        for b in 0..n {
            for alpha in 0..m_words {
                for beta in 0..m_words {
                    entries.push(damped[a][alpha].inner(&damped[b][beta]));
                }
            }
        }
    }
    GramBlockTable::from_entries(space.qubits(), omega.gamma(), n, m_words, entries)
}

/// Builds the same table from the closed-form elements of a
/// permutation-invariant code, grouping label pairs by support statistics.
pub fn gram_blocks_closed_form(code: &PiCode, omega: &TruncatedKrausSet) -> Result<GramBlockTable> {
    if code.qubits() != omega.qubits() {
        return Err(Error::InvalidCode(alloc::format!(
            "effect set acts on {} qubits, code on {}",
            omega.qubits(),
            code.qubits()
        )));
    }
    let n = omega.len();
    let gamma = omega.gamma();
    let mut cache: alloc::collections::BTreeMap<SupportConfig, [f64; 4]> =
        alloc::collections::BTreeMap::new();
    let mut entries = Vec::with_capacity(n * n * 4);
    for a in 0..n {
        for b in 0..n {
            let cfg = SupportConfig::of_pair(omega.label(a), omega.label(b));
            if !cache.contains_key(&cfg) {
                let mut block = [0.0; 4];
                for alpha in 0..2 {
                    for beta in 0..2 {
                        block[alpha * 2 + beta] = pi_matrix_element(code, alpha, beta, cfg, gamma)?;
                    }
                }
                cache.insert(cfg, block);
            }
            let block = cache[&cfg];
            for &value in &block {
                entries.push(Complex64::new(value, 0.0));
            }
        }
    }
    GramBlockTable::from_entries(code.qubits(), gamma, n, 2, entries)
}

/// Block averages, their spectrum, and the perturbation extracted from a
/// block table.
#[derive(Debug, Clone)]
pub struct KLReport {
    gamma: f64,
    codeword_count: usize,
    effect_count: usize,
    g: DMatrix<Complex64>,
    spectrum: Vec<f64>,
    lambda_min: f64,
    trace: f64,
    eps: Vec<Complex64>,
    eps_max: f64,
}

impl KLReport {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn codeword_count(&self) -> usize {
        self.codeword_count
    }

    pub fn effect_count(&self) -> usize {
        self.effect_count
    }

    /// The Hermitian matrix of block averages `g_{A,B}`.
    pub fn g_matrix(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    /// Eigenvalues of the average matrix, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Deviation `<alpha|A†B|beta> - g_{A,B} delta_{alpha,beta}`.
    pub fn eps(&self, a: usize, b: usize, alpha: usize, beta: usize) -> Complex64 {
        self.eps[block_index(self.effect_count, self.codeword_count, a, b, alpha, beta)]
    }

    /// Tightest single bound covering every deviation entry.
    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }
}

/// Extracts averages, spectrum, and perturbation from a block table.
pub fn kl_report(table: &GramBlockTable) -> Result<KLReport> {
    let n = table.effect_count();
    let m_words = table.codeword_count();
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for beta in 0..m_words {
                acc += table.entry(a, b, beta, beta);
            }
            g[(a, b)] = acc / m_words as f64;
        }
    }
    let eigen = hermitian_eigen(&g)?;
    let trace = (0..n).map(|a| g[(a, a)].re).sum();
    let mut eps = Vec::with_capacity(n * n * m_words * m_words);
    let mut eps_max = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for alpha in 0..m_words {
                for beta in 0..m_words {
                    let mut value = table.entry(a, b, alpha, beta);
                    if alpha == beta {
                        value -= g[(a, b)];
                    }
                    eps_max = eps_max.max(value.norm());
                    eps.push(value);
                }
            }
        }
    }
    Ok(KLReport {
        gamma: table.gamma(),
        codeword_count: m_words,
        effect_count: n,
        lambda_min: eigen.values[0],
        spectrum: eigen.values,
        g,
        trace,
        eps,
        eps_max,
    })
}

/// The effect family rotated to diagonalize the average matrix, with the
/// block table expressed in the rotated family.
#[derive(Debug, Clone)]
pub struct DiagonalizedKL {
    v: DMatrix<Complex64>,
    d: Vec<f64>,
    codeword_count: usize,
    effect_count: usize,
    transformed: Vec<Complex64>,
    eps_tilde_max: f64,
    eps_tilde_bound: f64,
}

impl DiagonalizedKL {
    /// Unitary whose row `F` holds the coefficients of the rotated effect
    /// `A~_F = sum_A v_{F,A} A`.
    pub fn v(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    /// Diagonal averages of the rotated family, ascending.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn transformed_entry(&self, f: usize, fp: usize, alpha: usize, beta: usize) -> Complex64 {
        self.transformed[block_index(self.effect_count, self.codeword_count, f, fp, alpha, beta)]
    }

    /// The `M x M` block `<alpha| A~_F† A~_F |beta>`.
    pub fn transformed_diagonal_block(&self, f: usize) -> DMatrix<Complex64> {
        let m_words = self.codeword_count;
        DMatrix::from_fn(m_words, m_words, |alpha, beta| {
            self.transformed_entry(f, f, alpha, beta)
        })
    }

    /// Largest deviation of the rotated table from `d_F delta delta`.
    pub fn eps_tilde_max(&self) -> f64 {
        self.eps_tilde_max
    }

    /// A-priori bound `|Omega| * eps_max` on that deviation.
    pub fn eps_tilde_bound(&self) -> f64 {
        self.eps_tilde_bound
    }
}

/// Diagonalizes the average matrix and rewrites the block table in the
/// rotated effect family.
///
/// The report must come from the same table. Three residuals are checked
/// against [`DIAGONALIZATION_TOL`]: unitarity of `V`, diagonality of
/// `V G V†`, and the block averages of the transformed table landing on the
/// eigenvalues. The last one re-derives the diagonalization from the
/// transformed data, so it would catch a wrong table transform.
pub fn diagonalize_gram(table: &GramBlockTable, report: &KLReport) -> Result<DiagonalizedKL> {
    let n = table.effect_count();
    let m_words = table.codeword_count();
    debug_assert_eq!(n, report.effect_count());
    debug_assert_eq!(m_words, report.codeword_count());
    let eigen = hermitian_eigen(report.g_matrix())?;
    let v = eigen.vectors.adjoint();

    let unitarity = {
        let gram = &v * v.adjoint();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(expected, 0.0)).norm());
            }
        }
        worst
    };
    if unitarity > DIAGONALIZATION_TOL {
        return Err(Error::DiagonalizationResidual {
            stage: "unitarity",
            defect: unitarity,
        });
    }

    let diagonality = {
        let rotated = &v * report.g_matrix() * v.adjoint();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { eigen.values[i] } else { 0.0 };
                worst = worst.max((rotated[(i, j)] - Complex64::new(expected, 0.0)).norm());
            }
        }
        worst
    };
    if diagonality > DIAGONALIZATION_TOL {
        return Err(Error::DiagonalizationResidual {
            stage: "diagonality",
            defect: diagonality,
        });
    }

    // T~(F,F') = conj(V) T V^T for each codeword pair, since the left
    // effect enters through its adjoint.
    let mut transformed = alloc::vec![Complex64::new(0.0, 0.0); n * n * m_words * m_words];
    let v_conj = v.map(|z| z.conj());
    for alpha in 0..m_words {
        for beta in 0..m_words {
            let t = DMatrix::from_fn(n, n, |a, b| table.entry(a, b, alpha, beta));
            // adjoint of conj(V) is V transposed
            let rotated = &v_conj * t * v_conj.adjoint();
            for f in 0..n {
                for fp in 0..n {
                    transformed[block_index(n, m_words, f, fp, alpha, beta)] = rotated[(f, fp)];
                }
            }
        }
    }

    let mut gram_residual = 0.0f64;
    let mut eps_tilde_max = 0.0f64;
    for f in 0..n {
        for fp in 0..n {
            let mut avg = Complex64::new(0.0, 0.0);
            for beta in 0..m_words {
                avg += transformed[block_index(n, m_words, f, fp, beta, beta)];
            }
            avg /= m_words as f64;
            let expected = if f == fp { eigen.values[f] } else { 0.0 };
            gram_residual = gram_residual.max((avg - Complex64::new(expected, 0.0)).norm());
            for alpha in 0..m_words {
                for beta in 0..m_words {
                    let mut value = transformed[block_index(n, m_words, f, fp, alpha, beta)];
                    if f == fp && alpha == beta {
                        value -= Complex64::new(eigen.values[f], 0.0);
                    }
                    eps_tilde_max = eps_tilde_max.max(value.norm());
                }
            }
        }
    }
    if gram_residual > DIAGONALIZATION_TOL {
        return Err(Error::DiagonalizationResidual {
            stage: "transformed averages",
            defect: gram_residual,
        });
    }

    Ok(DiagonalizedKL {
        v,
        d: eigen.values,
        codeword_count: m_words,
        effect_count: n,
        transformed,
        eps_tilde_max,
        eps_tilde_bound: n as f64 * report.eps_max(),
    })
}

/// Closed-form fidelity lower bound together with the per-effect floors
/// used in its derivation.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// `(tr G - M |Omega|^2 eps) / (1 + M |Omega|^3 eps / lambda_min(G))`.
    pub value: f64,
    /// Floor `d_A - M |Omega| eps` under each rotated diagonal block.
    pub effect_floors: Vec<f64>,
}

/// Evaluates the closed-form worst-case fidelity lower bound from a report.
///
/// Fails with [`Error::NonPositiveLambdaMin`] when the average matrix is
/// not positive definite; the bound is meaningless there.
pub fn fidelity_lower_bound(report: &KLReport) -> Result<BoundReport> {
    let lambda_min = report.lambda_min();
    if lambda_min <= 0.0 {
        return Err(Error::NonPositiveLambdaMin { lambda_min });
    }
    let m_words = report.codeword_count() as f64;
    let n = report.effect_count() as f64;
    let eps = report.eps_max();
    let value = (report.trace() - m_words * n * n * eps) / (1.0 + m_words * n * n * n * eps / lambda_min);
    let effect_floors = report
        .spectrum()
        .iter()
        .map(|&d| d - m_words * n * eps)
        .collect();
    Ok(BoundReport {
        value,
        effect_floors,
    })
}

/// Row-disc eigenvalue enclosures of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct GershgorinBounds {
    /// One `[center - radius, center + radius]` interval per row.
    pub intervals: Vec<(f64, f64)>,
    /// Smallest interval endpoint; lower bound on every eigenvalue.
    pub lower: f64,
    /// Largest interval endpoint; upper bound on every eigenvalue.
    pub upper: f64,
}

pub fn gershgorin_bounds(h: &DMatrix<Complex64>) -> Result<GershgorinBounds> {
    if h.nrows() != h.ncols() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if h.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if hermiticity_defect(h) > crate::linalg::HERMITICITY_TOL {
        return Err(Error::NotHermitian);
    }
    let mut intervals = Vec::with_capacity(h.nrows());
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for i in 0..h.nrows() {
        let center = h[(i, i)].re;
        let radius: f64 = (0..h.ncols())
            .filter(|&j| j != i)
            .map(|j| h[(i, j)].norm())
            .sum();
        intervals.push((center - radius, center + radius));
        lower = lower.min(center - radius);
        upper = upper.max(center + radius);
    }
    Ok(GershgorinBounds {
        intervals,
        lower,
        upper,
    })
}

/// Fits the decay order of `1 - bound` over a damping grid.
pub fn infidelity_slope(grid: &[f64], bounds: &[f64]) -> Result<SlopeFit> {
    validate_grid(grid)?;
    let ys: Vec<f64> = bounds.iter().map(|&b| 1.0 - b).collect();
    log_log_fit(grid, &ys)
}

/// Evaluates the closed-form bound for a permutation-invariant code across
/// a damping grid and fits the infidelity order.
pub fn bound_scaling_fit(code: &PiCode, t: u32, grid: &[f64]) -> Result<SlopeFit> {
    validate_grid(grid)?;
    let mut bounds = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let omega = crate::channels::truncated_kraus_set(code.qubits(), t, gamma)?;
        let table = gram_blocks_closed_form(code, &omega)?;
        let report = kl_report(&table)?;
        bounds.push(fidelity_lower_bound(&report)?.value);
    }
    infidelity_slope(grid, &bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::truncated_kraus_set;
    use crate::code_space::{as_code_space, build_custom_pi_code, build_pi_code};
    use crate::fit::geometric_grid;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn two_level_code() -> PiCode {
        build_custom_pi_code(
            1,
            [
                BTreeMap::from([(0u32, ratio(1, 1))]),
                BTreeMap::from([(1u32, ratio(1, 1))]),
            ],
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// M=1 table with a single diagonal entry per effect pair.
    fn scalar_table(diag: &[f64]) -> GramBlockTable {
        let n = diag.len();
        let mut entries = vec![c(0.0, 0.0); n * n];
        for (a, &value) in diag.iter().enumerate() {
            entries[a * n + a] = c(value, 0.0);
        }
        GramBlockTable::from_entries(2, 0.5, n, 1, entries).unwrap()
    }

    #[test]
    fn single_qubit_identity_effect_report() {
        // Keep only the no-damping effect on the trivial one-qubit code.
        let code = two_level_code();
        let space = as_code_space(&code).unwrap();
        let gamma = 0.1;
        let omega = truncated_kraus_set(1, 0, gamma).unwrap();
        let table = gram_blocks_sparse(&space, &omega).unwrap();
        assert_relative_eq!(table.entry(0, 0, 0, 0).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(table.entry(0, 0, 1, 1).re, 1.0 - gamma, epsilon = 1e-15);
        assert_eq!(table.entry(0, 0, 0, 1), c(0.0, 0.0));

        let report = kl_report(&table).unwrap();
        assert_relative_eq!(report.g_matrix()[(0, 0)].re, 1.0 - gamma / 2.0, epsilon = 1e-15);
        assert_relative_eq!(report.eps_max(), gamma / 2.0, epsilon = 1e-15);
        assert_relative_eq!(report.trace(), 1.0 - gamma / 2.0, epsilon = 1e-15);

        // (1 - 3g/2) / (1 + 2g/(2-g)) after substituting trace and floor.
        let bound = fidelity_lower_bound(&report).unwrap();
        assert_relative_eq!(bound.value, 0.85 * 1.9 / 2.1, epsilon = 1e-12);
        assert_eq!(bound.effect_floors.len(), 1);
        assert_relative_eq!(
            bound.effect_floors[0],
            1.0 - gamma / 2.0 - 2.0 * (gamma / 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn diagonal_entries_are_nonnegative_squared_norms() {
        let code = build_pi_code(1).unwrap();
        let space = as_code_space(&code).unwrap();
        let omega = truncated_kraus_set(13, 1, 0.2).unwrap();
        let table = gram_blocks_sparse(&space, &omega).unwrap();
        for a in 0..table.effect_count() {
            for alpha in 0..2 {
                let d = table.entry(a, a, alpha, alpha);
                assert!(d.im.abs() < 1e-15 && d.re >= 0.0);
            }
        }
    }

    #[test]
    fn sparse_and_closed_form_paths_agree() {
        let code = build_pi_code(1).unwrap();
        let space = as_code_space(&code).unwrap();
        for gamma in [0.01, 0.1, 0.3] {
            let omega = truncated_kraus_set(13, 1, gamma).unwrap();
            let sparse = gram_blocks_sparse(&space, &omega).unwrap();
            let closed = gram_blocks_closed_form(&code, &omega).unwrap();
            let n = omega.len();
            let mut worst = 0.0f64;
            for a in 0..n {
                for b in 0..n {
                    for alpha in 0..2 {
                        for beta in 0..2 {
                            let diff = sparse.entry(a, b, alpha, beta)
                                - closed.entry(a, b, alpha, beta);
                            worst = worst.max(diff.norm());
                        }
                    }
                }
            }
            assert!(worst <= 1e-12, "gamma={gamma}: path difference {worst}");
        }
    }

    #[test]
    fn frozen_report_quantities_for_t1() {
        let code = build_pi_code(1).unwrap();
        for (gamma, lambda_min, trace, bound) in [
            (0.01, 0.002318252125558456, 0.9981329910328616, 0.5284436220245317),
            (0.1, 0.011663692113937483, 0.8725485102368128, 0.0046387937751914835),
        ] {
            let omega = truncated_kraus_set(13, 1, gamma).unwrap();
            let table = gram_blocks_closed_form(&code, &omega).unwrap();
            let report = kl_report(&table).unwrap();
            assert_relative_eq!(report.lambda_min(), lambda_min, max_relative = 1e-10);
            assert_relative_eq!(report.trace(), trace, max_relative = 1e-12);
            let b = fidelity_lower_bound(&report).unwrap();
            assert_relative_eq!(b.value, bound, max_relative = 1e-9);
            assert!(report.trace() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn eps_block_averages_vanish() {
        // The diagonal average of every deviation block is zero by
        // construction of the block averages.
        let code = build_pi_code(1).unwrap();
        let omega = truncated_kraus_set(13, 1, 0.1).unwrap();
        let table = gram_blocks_closed_form(&code, &omega).unwrap();
        let report = kl_report(&table).unwrap();
        let n = report.effect_count();
        for a in 0..n {
            for b in 0..n {
                let avg = (report.eps(a, b, 0, 0) + report.eps(a, b, 1, 1)) / 2.0;
                assert!(avg.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn perfect_table_has_zero_eps_and_trace_bound() {
        let table = scalar_table(&[0.6, 0.3]);
        let report = kl_report(&table).unwrap();
        assert_eq!(report.eps_max(), 0.0);
        assert_relative_eq!(report.trace(), 0.9, epsilon = 1e-15);
        // eps = 0 collapses the bound to the trace exactly.
        let bound = fidelity_lower_bound(&report).unwrap();
        assert_relative_eq!(bound.value, report.trace(), epsilon = 1e-15);
    }

    #[test]
    fn diagonalization_of_scalar_table_sorts_and_permutes() {
        let table = scalar_table(&[3.0, 2.0]);
        let report = kl_report(&table).unwrap();
        let diag = diagonalize_gram(&table, &report).unwrap();
        assert_relative_eq!(diag.d()[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(diag.d()[1], 3.0, epsilon = 1e-12);
        // Rotated blocks stay diagonal with the sorted averages.
        assert_relative_eq!(diag.transformed_entry(0, 0, 0, 0).re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(diag.transformed_entry(1, 1, 0, 0).re, 3.0, epsilon = 1e-12);
        assert!(diag.transformed_entry(0, 1, 0, 0).norm() <= 1e-12);
        assert_eq!(diag.eps_tilde_max(), diag.eps_tilde_max());
        assert!(diag.eps_tilde_max() <= 1e-12);
    }

    #[test]
    fn diagonalization_invariants_for_t1() {
        let code = build_pi_code(1).unwrap();
        for gamma in [0.01, 0.1] {
            let omega = truncated_kraus_set(13, 1, gamma).unwrap();
            let table = gram_blocks_closed_form(&code, &omega).unwrap();
            let report = kl_report(&table).unwrap();
            let diag = diagonalize_gram(&table, &report).unwrap();
            let n = report.effect_count();

            // Rotated deviation stays under the a-priori factor.
            assert!(diag.eps_tilde_max() <= diag.eps_tilde_bound() + 1e-12);
            assert_relative_eq!(
                diag.eps_tilde_bound(),
                n as f64 * report.eps_max(),
                epsilon = 1e-15
            );

            // Every eigenvalue of G dominates the global minimum, and each
            // rotated diagonal block sits above its per-effect floor.
            let floors = fidelity_lower_bound(&report).unwrap().effect_floors;
            for (f, &floor) in floors.iter().enumerate() {
                assert!(diag.d()[f] >= report.lambda_min() - 1e-15);
                let block = diag.transformed_diagonal_block(f);
                let eigen = hermitian_eigen(&block).unwrap();
                assert!(
                    eigen.values[0] >= floor - 1e-10,
                    "block {f}: {} < {floor}",
                    eigen.values[0]
                );
            }
        }
    }

    #[test]
    fn negative_average_matrix_rejects_the_bound() {
        let table = scalar_table(&[-0.5]);
        let report = kl_report(&table).unwrap();
        assert!(matches!(
            fidelity_lower_bound(&report),
            Err(Error::NonPositiveLambdaMin { .. })
        ));
    }

    #[test]
    fn bound_formula_spot_check() {
        // M=2, one effect, trace 0.9, eps 0.01.
        let entries = vec![
            c(0.91, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.89, 0.0),
        ];
        let table = GramBlockTable::from_entries(1, 0.5, 1, 2, entries).unwrap();
        let report = kl_report(&table).unwrap();
        assert_relative_eq!(report.eps_max(), 0.01, epsilon = 1e-15);
        let bound = fidelity_lower_bound(&report).unwrap();
        assert_relative_eq!(
            bound.value,
            (0.9 - 2.0 * 0.01) / (1.0 + 2.0 * 0.01 / 0.9),
            epsilon = 1e-14
        );
    }

    #[test]
    fn table_constructor_rejects_bad_input() {
        assert!(matches!(
            GramBlockTable::from_entries(1, 0.5, 1, 2, vec![c(0.0, 0.0); 3]),
            Err(Error::TableShape { expected: 4, got: 3 })
        ));
        // Break conjugate symmetry across the two effects.
        let mut entries = vec![c(0.0, 0.0); 4];
        entries[1] = c(0.5, 0.0);
        entries[2] = c(0.1, 0.0);
        assert!(matches!(
            GramBlockTable::from_entries(1, 0.5, 2, 1, entries),
            Err(Error::ConjugateSymmetryViolated { .. })
        ));
    }

    #[test]
    fn gershgorin_bounds_on_small_matrices() {
        let h = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(3.0, 0.0)]);
        let b = gershgorin_bounds(&h).unwrap();
        assert_relative_eq!(b.intervals[0].0, 1.9, epsilon = 1e-15);
        assert_relative_eq!(b.intervals[0].1, 2.1, epsilon = 1e-15);
        assert_relative_eq!(b.lower, 1.9, epsilon = 1e-15);
        assert_relative_eq!(b.upper, 3.1, epsilon = 1e-15);

        let d = DMatrix::from_row_slice(2, 2, &[c(5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(7.0, 0.0)]);
        let b = gershgorin_bounds(&d).unwrap();
        assert_eq!(b.intervals, vec![(5.0, 5.0), (7.0, 7.0)]);

        let skew = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(gershgorin_bounds(&skew).is_err());
    }

    #[test]
    fn gershgorin_encloses_random_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let raw = DMatrix::from_fn(8, 8, |_, _| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let h = (&raw + raw.adjoint()) * c(0.5, 0.0);
            let b = gershgorin_bounds(&h).unwrap();
            let eigen = hermitian_eigen(&h).unwrap();
            for &value in &eigen.values {
                assert!(value >= b.lower - 1e-12 && value <= b.upper + 1e-12);
                assert!(b
                    .intervals
                    .iter()
                    .any(|&(lo, hi)| value >= lo - 1e-9 && value <= hi + 1e-9));
            }
        }
    }

    #[test]
    fn bound_infidelity_order_matches_correction_power() {
        let code = build_pi_code(1).unwrap();
        let grid = geometric_grid(1e-4, 10f64.powf(-2.5), 6);
        match bound_scaling_fit(&code, 1, &grid).unwrap() {
            SlopeFit::Fitted { slope, .. } => {
                assert!((1.9..2.2).contains(&slope), "slope {slope}");
            }
            SlopeFit::Exact => panic!("infidelity is positive"),
        }
    }

    #[test]
    fn saturated_bound_is_reported_as_exact() {
        let grid = geometric_grid(1e-3, 1e-1, 5);
        let bounds = vec![1.0; 5];
        assert!(matches!(
            infidelity_slope(&grid, &bounds).unwrap(),
            SlopeFit::Exact
        ));
    }

    #[test]
    fn scaling_fit_requires_enough_points() {
        let code = build_pi_code(1).unwrap();
        assert!(matches!(
            bound_scaling_fit(&code, 1, &[0.01]),
            Err(Error::InsufficientGrid { .. })
        ));
    }
}
