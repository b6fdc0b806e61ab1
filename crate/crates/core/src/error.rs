use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("matrix contains a non-finite entry")]
    NonFiniteEntry,

    #[error("matrix is not Hermitian (defect {defect:.3e}, tolerance {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("vector is not self-adjoint (defect {defect:.3e})")]
    NotSelfAdjoint { defect: f64 },

    #[error("density matrix has an eigenvalue {eigenvalue:.3e} below the faithfulness floor {floor:.3e}")]
    FaithfulnessFloor { eigenvalue: f64, floor: f64 },

    #[error("density matrix trace deviates from 1 by {defect:.3e}")]
    TraceNotOne { defect: f64 },

    #[error("map is not state-reducing: min eigenvalue of rho - Phi*(rho) is {min_eig:.3e}")]
    NotStateReducing { min_eig: f64 },

    #[error("operator {index} is not a self-adjoint contraction: {detail}")]
    NotContraction { index: usize, detail: String },

    #[error("operator {index} is not self-adjoint (defect {defect:.3e})")]
    OperatorNotSelfAdjoint { index: usize, defect: f64 },

    #[error(
        "reconstructed Choi matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
    )]
    ChoiNotPsd { min_eig: f64 },

    #[error("precondition failed: {hypothesis} (residual {residual:.3e})")]
    PreconditionFailed { hypothesis: String, residual: f64 },

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("analytic continuation rejected: |Im z| * log cond(rho) = {magnitude:.3e} exceeds bound {bound:.3e}")]
    AnalyticOverflow { magnitude: f64, bound: f64 },

    #[error("quadrature unstable: {detail}")]
    QuadratureUnstable { detail: String },

    #[error("schedule exhausted at stage j={stage}: {failing_residual}")]
    ScheduleExhausted {
        stage: usize,
        failing_residual: String,
    },

    #[error(
        "degenerate denominator: phi(1-c) = {denominator:.3e} while ||1 - Phi(1)|| = {defect:.3e}"
    )]
    DegenerateDenominator { denominator: f64, defect: f64 },

    #[error("linear system too ill-conditioned: condition estimate {cond:.3e}")]
    SingularSystem { cond: f64 },

    #[error("subsequence selection exhausted at step {step}: no remaining operator meets the 2^-n criterion")]
    SubsequenceExhausted { step: usize },

    #[error("resolvent truncation failed the Cauchy criterion: residual {residual:.3e}")]
    CauchyFailure { residual: f64 },

    #[error("semigroup truncation did not converge: residual {residual:.3e}")]
    NonConvergent { residual: f64 },

    #[error("spectral model dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
