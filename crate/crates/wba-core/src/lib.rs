//! Weighted multiple Birkhoff averages over torus rotations.
//!
//! The crate computes the discrete average
//! `DMW_N = (1/A_N) sum_{n<N} w(n/N) F_1(theta + n rho_1) ... F_l(theta + n rho_l)`
//! and its continuous counterpart `CMW_T`, measures how fast they approach
//! the product of spatial averages, and ships the surrounding diagnostics:
//! small-divisor scans, continued fractions, eta-weighted lattice shells,
//! symbolic bump derivatives, envelope rate fits, and the boundedness /
//! truncated-smallness condition audits.
//!
//! Modules map one-to-one onto the moving parts:
//!
//! * [`weights`] — the uniform, sin², and exponential-bump windows, the
//!   normalizer Z, and exact high-order bump derivatives.
//! * [`rotations`] — rotation vectors, joint rotations, divisor scans,
//!   Diophantine witnesses, continued fractions, lattice shells.
//! * [`observables`] — sparse Fourier observables with decay audits and a
//!   bit-exact JSON wire format.
//! * [`averaging`] — the DMW/CMW kernels, error curves, and the sin²
//!   counterexample closed forms.
//! * [`analysis`] — dyadic envelopes, power/stretched rate fits, truncated
//!   space sizes, condition audits.

pub mod analysis;
pub mod averaging;
pub mod error;
pub mod hexfloat;
pub mod observables;
pub mod quad;
pub mod rotations;
pub mod sum;
pub mod weights;

pub use analysis::{
    audit_boundedness, audit_boundedness_infinite, audit_truncated_smallness, envelope, fit_power,
    fit_stretched, truncated_space_size, AdaptiveFn, ApproxFn, ApproxInverse, ConditionAudit,
    ConditionKind, CurvePoint, FitModel, RateFit, SmallnessSpace, Verdict,
};
pub use averaging::{
    cmw, counterexample_h, counterexample_h_aligned, counterexample_rho, dmw, error_curve,
    resonant_h, AverageMode, AverageResult, AverageSpec,
};
pub use error::{Error, Result};
pub use observables::{decay_audit, DecayFamily, DecayReport, DecaySpec, FourierObservable};
pub use rotations::{
    continued_fraction, diophantine_witness, divisor_scan, enumerate_eta_shell, shell_count,
    smallest_divisor, sup_theta_over_ball, DivisorScan, JointRotation, LatticeVector,
    RotationVector, ScanMode,
};
pub use weights::{
    bump_derivative_l1, bump_derivative_symbolic, RationalFunction, WeightFunction, WeightKind,
};
