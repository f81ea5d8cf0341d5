//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by kernel and diagnostic routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("derivative order {order} exceeds the supported cap {cap}")]
    DerivativeCapExceeded { order: u32, cap: u32 },

    #[error("adaptive quadrature did not reach relative tolerance {tol:e}")]
    QuadratureNonConvergence { tol: f64 },

    #[error("lattice ball with {candidates} candidates exceeds the scan guard {guard}")]
    BallTooLarge { candidates: u128, guard: u128 },

    #[error("shell enumeration guard exceeded: {what}")]
    GuardExceeded { what: String },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("cutoff {cutoff} too small for sigma {sigma}: tail weight {tail:e} above 1e-16")]
    CutoffTooSmall { cutoff: usize, sigma: f64, tail: f64 },

    #[error("imaginary residue {residue:e} exceeds tolerance for a real-valued observable")]
    ImaginaryResidue { residue: f64 },

    #[error("normalizer A_N vanished")]
    ZeroNormalizer,

    #[error("quadrature budget exceeded: {evaluations} evaluations over guard {guard}")]
    PanelBudgetExceeded { evaluations: u128, guard: u128 },

    #[error("denominator within {tol:e} of a singularity at T = {t}")]
    SingularDenominator { t: f64, tol: f64 },

    #[error("too few points: need {need}, have {have}")]
    TooFewPoints { need: usize, have: usize },

    #[error("degenerate abscissae: all scales equal after filtering")]
    DegenerateAbscissae,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hex float parse error: {0}")]
    HexFloat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
