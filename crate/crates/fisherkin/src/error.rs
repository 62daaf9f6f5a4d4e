//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FisherkinError {
    /// A density grid with no cells or zero mass.
    #[error("empty-domain: {0}")]
    EmptyDomain(String),

    /// Explicit time stepping was requested with too few steps for stability.
    #[error("cfl-violation: {steps} steps requested, need at least {suggested}")]
    CflViolation { steps: usize, suggested: usize },

    /// Root bracketing for the turning-point radius failed.
    #[error("no-turning-point: {0}")]
    NoTurningPoint(String),

    /// Requested deviation angle lies outside the invertible range of theta(p).
    #[error("angle-out-of-range: {0}")]
    AngleOutOfRange(String),

    /// Momentum-transfer integral diverges (nu >= 2 without angular cutoff).
    #[error("divergent-M: {0}")]
    DivergentMomentumTransfer(String),

    /// Compensated adjoint kernel integral diverges.
    #[error("divergent-S: {0}")]
    DivergentCompensatedAdjoint(String),

    /// Spectral eigenvalue integral diverges without cutoff.
    #[error("divergent-nu: {0}")]
    DivergentNu(String),

    /// Singular kernel used in a quadrature that requires an angular cutoff.
    #[error("needs-cutoff: {0}")]
    NeedsCutoff(String),

    /// Dimension of two arguments disagree.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// Parameter outside the supported range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Ratio of kernels against a reference that vanishes on the grid.
    #[error("reference kernel vanishes on the comparison grid")]
    VanishingReference,

    /// Iterative minimisation produced a non-finite ratio.
    #[error("minimizer diverged: {0}")]
    MinimizerDiverged(String),

    /// A conservation or monotonicity invariant was breached during a flow.
    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    /// Post-collisional interpolation lost more mass than the tracked budget.
    #[error("interpolation leakage {leakage:.3e} exceeds budget {budget:.3e}")]
    ExcessLeakage { leakage: f64, budget: f64 },

    /// Malformed kernel specification string.
    #[error("kernel spec: {0}")]
    KernelSpec(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FisherkinError>;
