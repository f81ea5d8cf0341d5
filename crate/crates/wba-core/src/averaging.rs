//! The discrete and continuous weighted multiple ergodic averages, and the
//! closed-form counterexamples that calibrate them.
//!
//! DMW_N = (1/A_N) sum_{n<N} w(n/N) prod_j F_j(theta0 + n rho_j), with
//! A_N = sum w(s/N). CMW_T = (1/T) int_0^T w(s/T) prod_j F_j(theta0 + s rho_j) ds.
//! Both converge to the product of the spatial averages when the joint
//! rotation is nonresonant; the counterexamples pin the optimal degree-3
//! polynomial rate for the sin^2 weight and the 1/2 limit when the
//! jointness is dropped.

use crate::error::{Error, Result};
use crate::observables::FourierObservable;
use crate::quad::GaussLegendre;
use crate::rotations::JointRotation;
use crate::sum::CompensatedSum;
use crate::weights::WeightFunction;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Budget on continuous-average integrand evaluations.
pub const CMW_EVAL_GUARD: u128 = 100_000_000;

/// Minimum panels so the weight itself is resolved even when the
/// observables barely oscillate.
const CMW_MIN_PANELS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageMode {
    Discrete {
        n: u64,
    },
    Continuous {
        t: f64,
        nodes_per_period: u32,
    },
}

/// Full description of one weighted multiple average.
#[derive(Debug, Clone)]
pub struct AverageSpec {
    pub weight: WeightFunction,
    pub observables: Vec<FourierObservable>,
    pub joint: JointRotation,
    pub theta0: Vec<f64>,
    pub mode: AverageMode,
}

impl AverageSpec {
    fn validate(&self) -> Result<()> {
        if self.observables.len() != self.joint.ell() {
            return Err(Error::DimensionMismatch {
                expected: self.joint.ell(),
                got: self.observables.len(),
            });
        }
        let d = self.joint.dim();
        for f in &self.observables {
            if f.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: f.dim(),
                });
            }
        }
        if self.theta0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.theta0.len(),
            });
        }
        match self.mode {
            AverageMode::Discrete { n } => {
                if n == 0 {
                    return Err(Error::InvalidParameter("discrete average needs N >= 1".into()));
                }
            }
            AverageMode::Continuous { t, nodes_per_period } => {
                if t <= 0.0 {
                    return Err(Error::InvalidParameter("continuous average needs T > 0".into()));
                }
                if nodes_per_period < 8 {
                    return Err(Error::InvalidParameter(
                        "quadrature needs at least 8 nodes per period".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Product of the spatial averages (the limit under joint nonresonance).
    pub fn target(&self) -> f64 {
        self.observables
            .iter()
            .map(FourierObservable::spatial_average)
            .product::<Complex64>()
            .re
    }

    pub fn with_mode(&self, mode: AverageMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }
}

/// One evaluated average with its distance to the nonresonant target and
/// the rounding floor of the summation that produced it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AverageResult {
    pub scale: f64,
    pub value: f64,
    pub target: f64,
    pub abs_error: f64,
    pub floor: f64,
}

/// Discrete weighted multiple average at the spec's N.
pub fn dmw(spec: &AverageSpec) -> Result<AverageResult> {
    spec.validate()?;
    let AverageMode::Discrete { n } = spec.mode else {
        return Err(Error::InvalidParameter("dmw needs a discrete mode".into()));
    };
    let d = spec.joint.dim();
    let ell = spec.joint.ell();
    // Per-factor fractional steps; the orbit advances by iterated
    // fractional addition, never by frac(n * rho).
    let steps: Vec<Vec<f64>> = spec
        .joint
        .components()
        .iter()
        .map(|r| r.phases().iter().map(|p| p.rem_euclid(1.0)).collect())
        .collect();
    let mut phases: Vec<Vec<f64>> = vec![spec.theta0.iter().map(|t| t.rem_euclid(1.0)).collect(); ell];

    let nf = n as f64;
    let mut weight_sum = CompensatedSum::new();
    let mut value_sum = CompensatedSum::new();
    let mut abs_sum = CompensatedSum::new();
    for step in 0..n {
        let w = spec.weight.eval(step as f64 / nf);
        weight_sum.add(w);
        let mut product = 1.0;
        for (f, phase) in spec.observables.iter().zip(&phases) {
            product *= f.eval(phase)?;
        }
        let term = w * product;
        value_sum.add(term);
        abs_sum.add(term.abs());
        for (phase, step) in phases.iter_mut().zip(&steps) {
            for i in 0..d {
                phase[i] = (phase[i] + step[i]) % 1.0;
            }
        }
    }
    let a_n = weight_sum.value();
    if a_n <= 0.0 {
        return Err(Error::ZeroNormalizer);
    }
    let value = value_sum.value() / a_n;
    let target = spec.target();
    Ok(AverageResult {
        scale: nf,
        value,
        target,
        abs_error: (value - target).abs(),
        floor: 10.0 * f64::EPSILON * abs_sum.value() / a_n,
    })
}

/// Continuous weighted multiple average at the spec's T, by composite
/// Gauss-Legendre panels sized to the integrand's total oscillation.
///
/// The value is normalized by the quadrature of the weight over the same
/// nodes (the exact normalizer is T * int w = T); this keeps constant
/// observables exact and perturbs nothing above 1e-14 relative.
pub fn cmw(spec: &AverageSpec) -> Result<AverageResult> {
    spec.validate()?;
    let AverageMode::Continuous { t, nodes_per_period } = spec.mode else {
        return Err(Error::InvalidParameter("cmw needs a continuous mode".into()));
    };
    let d = spec.joint.dim();
    // Cycles of the fastest factor over y in [0,1]: T * ||k||_max * max|rho|.
    let mut cycles = 1.0_f64;
    for (f, r) in spec.observables.iter().zip(spec.joint.components()) {
        let rho_max = r.phases().iter().fold(0.0_f64, |m, &p| m.max(p.abs()));
        cycles += t * f.max_frequency() as f64 * rho_max;
    }
    let panels = (cycles.ceil() as usize).max(CMW_MIN_PANELS);
    let evals = (panels as u128).saturating_mul(u128::from(nodes_per_period));
    if evals > CMW_EVAL_GUARD {
        return Err(Error::PanelBudgetExceeded {
            evaluations: evals,
            guard: CMW_EVAL_GUARD,
        });
    }
    let rule = GaussLegendre::new(nodes_per_period as usize);

    let mut err: Option<Error> = None;
    let mut numer = CompensatedSum::new();
    let mut denom = CompensatedSum::new();
    let mut abs_acc = CompensatedSum::new();
    let h = 1.0 / panels as f64;
    {
        let mut g = |y: f64| -> f64 {
            let w = spec.weight.eval(y);
            let mut product = 1.0;
            for (f, r) in spec.observables.iter().zip(spec.joint.components()) {
                let theta: Vec<f64> = spec
                    .theta0
                    .iter()
                    .zip(r.phases())
                    .map(|(&t0, &rho)| (t0 + y * t * rho).rem_euclid(1.0))
                    .collect();
                debug_assert_eq!(theta.len(), d);
                match f.eval(&theta) {
                    Ok(v) => product *= v,
                    Err(e) => {
                        err.get_or_insert(e);
                        return 0.0;
                    }
                }
            }
            w * product
        };
        for p in 0..panels {
            let lo = p as f64 * h;
            let hi = if p + 1 == panels { 1.0 } else { lo + h };
            numer.add(rule.integrate(lo, hi, &mut g));
            abs_acc.add(rule.integrate(lo, hi, |y| g(y).abs()));
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    for p in 0..panels {
        let lo = p as f64 * h;
        let hi = if p + 1 == panels { 1.0 } else { lo + h };
        denom.add(rule.integrate(lo, hi, |y| spec.weight.eval(y)));
    }
    let weight_mass = denom.value();
    if weight_mass <= 0.0 {
        return Err(Error::ZeroNormalizer);
    }
    let value = numer.value() / weight_mass;
    let target = spec.target();
    Ok(AverageResult {
        scale: t,
        value,
        target,
        abs_error: (value - target).abs(),
        floor: 10.0 * f64::EPSILON * abs_acc.value() / weight_mass,
    })
}

/// Evaluate the spec at each scale (N or T according to the mode),
/// independently and in order.
pub fn error_curve(spec: &AverageSpec, scales: &[f64]) -> Result<Vec<AverageResult>> {
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "scales must be strictly increasing".into(),
        ));
    }
    scales
        .par_iter()
        .map(|&s| {
            let mode = match spec.mode {
                AverageMode::Discrete { .. } => {
                    if s < 1.0 || s.fract() != 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "discrete scale {s} is not a positive integer"
                        )));
                    }
                    AverageMode::Discrete { n: s as u64 }
                }
                AverageMode::Continuous { nodes_per_period, .. } => AverageMode::Continuous {
                    t: s,
                    nodes_per_period,
                },
            };
            let local = spec.with_mode(mode);
            match mode {
                AverageMode::Discrete { .. } => dmw(&local),
                AverageMode::Continuous { .. } => cmw(&local),
            }
        })
        .collect()
}

/// Rotation pair of the sin^2 counterexample: rho1 + rho2 = 4 and
/// rho1 - rho2 = pi, so upsilon = (rho1+rho2)/(rho1-rho2) = 4/pi.
pub fn counterexample_rho() -> (f64, f64) {
    (
        (4.0 + std::f64::consts::PI) / 2.0,
        (4.0 - std::f64::consts::PI) / 2.0,
    )
}

const SINGULAR_TOL: f64 = 1e-12;

/// Closed form of the sin^2-weighted continuous multiple average with
/// F_1 = F_2 = sin(2 pi .), theta0 = 0, and the counterexample rotations.
pub fn counterexample_h(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    let (rho1, rho2) = counterexample_rho();
    let sum = rho1 + rho2;
    let diff = rho1 - rho2;
    for freq in [sum, diff] {
        if ((freq * t).powi(2) - 1.0).abs() < SINGULAR_TOL {
            return Err(Error::SingularDenominator {
                t,
                tol: SINGULAR_TOL,
            });
        }
    }
    let tau = std::f64::consts::TAU;
    let term = |freq: f64| (tau * freq * t).sin() / (freq * t * ((freq * t).powi(2) - 1.0));
    Ok((term(sum) - term(diff)) / (4.0 * std::f64::consts::PI))
}

/// |H(T_n)| at the aligned times T_n = n / (rho1 - rho2) = n / pi, where
/// the difference term vanishes and the closed form collapses to
/// |sin(8n)| / (4 pi upsilon n (upsilon^2 n^2 - 1)).
pub fn counterexample_h_aligned(n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let upsilon = 4.0 / std::f64::consts::PI;
    let nf = f64::from(n);
    let t_n = nf / std::f64::consts::PI;
    let value = (8.0 * nf).sin().abs()
        / (4.0 * std::f64::consts::PI * upsilon * nf * (upsilon * upsilon * nf * nf - 1.0));
    Ok((t_n, value))
}

/// Closed form of the resonant (rho1 = rho2 = rho) sin^2-weighted average:
/// (1/8)(4 - sin(4 pi T rho) / (pi T rho - 4 pi T^3 rho^3)) -> 1/2.
pub fn resonant_h(t: f64, rho: f64) -> Result<f64> {
    if t <= 0.0 || rho == 0.0 {
        return Err(Error::InvalidParameter("need T > 0 and rho != 0".into()));
    }
    let pi = std::f64::consts::PI;
    let denom = pi * t * rho - 4.0 * pi * t.powi(3) * rho.powi(3);
    if denom.abs() < SINGULAR_TOL {
        return Err(Error::SingularDenominator {
            t,
            tol: SINGULAR_TOL,
        });
    }
    Ok(0.125 * (4.0 - (4.0 * pi * t * rho).sin() / denom))
}
