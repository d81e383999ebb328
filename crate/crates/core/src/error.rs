use alloc::string::String;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("damping rate gamma = {0} must lie strictly inside (0, 1)")]
    GammaOutOfRange(f64),
    #[error("{0}")]
    InvalidCode(String),
    #[error("label {bits:#b} does not fit on {m} qubits")]
    InvalidLabel { bits: u64, m: u32 },
    #[error("support sizes ({left}, {right}) cannot produce a union of {union}")]
    InvalidSupportConfig { left: u32, right: u32, union: u32 },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("grid has {points} points, order fits need at least {required}")]
    InsufficientGrid { points: usize, required: usize },
    #[error("grid must be strictly increasing and positive")]
    GridNotIncreasing,
    #[error("grid spans {decades:.2} decades, order fits need at least {required}")]
    GridTooNarrow { decades: f64, required: f64 },
    #[error("ordinate is zero or negative where a log-log fit was requested")]
    NonPositiveOrdinate,
    #[error("ratio identity needs c <= k <= b <= m - c, got m={m} k={k} c={c} b={b}")]
    RatioParamsOutOfRange { m: u64, k: u64, c: u64, b: u64 },
    #[error("block table needs {expected} entries, got {got}")]
    TableShape { expected: usize, got: usize },
    #[error("block table breaks conjugate symmetry by {defect:e}")]
    ConjugateSymmetryViolated { defect: f64 },
    #[error("diagonalization {stage} residual {defect:e} exceeds tolerance")]
    DiagonalizationResidual { stage: &'static str, defect: f64 },
    #[error("average matrix minimum eigenvalue {lambda_min:e} is not positive; the closed-form bound does not apply")]
    NonPositiveLambdaMin { lambda_min: f64 },
    #[error("effect {index} annihilates the whole code space")]
    SingularEffect { index: usize },
    #[error("projector sum norm {norm} exceeds the allowed {allowed}")]
    BoundViolated { norm: f64, allowed: f64 },
    #[error("optimizer did not reach stationarity within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("density matrix trace {trace} is not 1")]
    TraceNotOne { trace: f64 },
    #[error("matrix has eigenvalue {lambda_min:e} below the PSD tolerance")]
    NotPositiveSemidefinite { lambda_min: f64 },
    #[error("Bloch vector length {norm} exceeds 1")]
    BlochVectorTooLong { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("literal channel sum over 2^{qubits} labels exceeds the 2^{max} limit")]
    LiteralSumTooLarge { qubits: u32, max: u32 },
}

pub type Result<T> = core::result::Result<T, Error>;
