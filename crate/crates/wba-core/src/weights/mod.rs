//! Weighting functions for the averaging kernels.
//!
//! Three kinds: the uniform (unweighted) window, the `2 sin^2(pi x)`
//! window, and the exponential bump `exp(-1/(x(1-x)))/Z` which is C-infinity
//! with all derivatives vanishing at 0 and 1. The bump is what turns the
//! slow O(1/N) Birkhoff convergence into the rapid regimes this crate
//! measures, and its high-order derivative growth is tracked exactly.

mod rational;

pub use rational::{Polynomial, RationalFunction};

use crate::error::{Error, Result};
use crate::quad;
use crate::sum::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Hard cap on the symbolic derivative order: coefficient bit-length grows
/// super-exponentially and 12 already exhibits the growth trend.
pub const DERIVATIVE_CAP: u32 = 12;

/// Relative tolerance for the normalizer Z.
const Z_REL_TOL: f64 = 1e-12;

/// Relative tolerance for derivative L1 norms.
const L1_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "sin2")]
    SinSquared,
    #[serde(rename = "bump")]
    ExponentialBump,
}

impl WeightKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "sin2" => Ok(Self::SinSquared),
            "bump" => Ok(Self::ExponentialBump),
            other => Err(Error::InvalidParameter(format!(
                "unknown weight kind {other:?}; expected uniform|sin2|bump"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::SinSquared => "sin2",
            Self::ExponentialBump => "bump",
        }
    }
}

/// A normalized weighting function on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction {
    kind: WeightKind,
    /// ∫₀¹ exp(−1/(t(1−t))) dt; populated only for the bump kind.
    normalizer_z: Option<f64>,
}

/// The unnormalized bump exp(-1/(x(1-x))) on (0,1), 0 elsewhere.
#[inline]
fn bump_unnormalized(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// Z is computed once per process; construction is eager so evaluation
/// never races on initialization.
fn bump_normalizer() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        quad::adaptive(&bump_unnormalized, 0.0, 1.0, Z_REL_TOL)
            .expect("bump normalizer quadrature converges")
    })
}

impl WeightFunction {
    pub fn new(kind: WeightKind) -> Self {
        let normalizer_z = match kind {
            WeightKind::ExponentialBump => Some(bump_normalizer()),
            _ => None,
        };
        Self { kind, normalizer_z }
    }

    pub fn uniform() -> Self {
        Self::new(WeightKind::Uniform)
    }

    pub fn sin_squared() -> Self {
        Self::new(WeightKind::SinSquared)
    }

    pub fn exponential_bump() -> Self {
        Self::new(WeightKind::ExponentialBump)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// The cached value of ∫₀¹ exp(−1/(t(1−t))) dt for the bump kind.
    pub fn normalizer_z(&self) -> Option<f64> {
        self.normalizer_z
    }

    /// Evaluate w(x). Total: outside the support the value is exactly 0.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Uniform => {
                if (0.0..1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            WeightKind::SinSquared => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    let s = (std::f64::consts::PI * x).sin();
                    2.0 * s * s
                }
            }
            WeightKind::ExponentialBump => {
                bump_unnormalized(x) / self.normalizer_z.unwrap_or_else(bump_normalizer)
            }
        }
    }

    /// A_N = Σ_{s=0}^{N−1} w(s/N), compensated. A_N/N → 1.
    pub fn sum(&self, n: u64) -> f64 {
        assert!(n >= 1, "weight sum needs N >= 1");
        let mut acc = CompensatedSum::new();
        let nf = n as f64;
        for s in 0..n {
            acc.add(self.eval(s as f64 / nf));
        }
        acc.value()
    }
}

/// Numerator polynomials P_n with d^n/dx^n exp(-1/(x(1-x))) =
/// P_n(x)/(x(1-x))^{2n} * exp(-1/(x(1-x))).
///
/// With u = x - x^2 the recurrence for R_{n+1} = R_n' + R_n * u'/u^2
/// clears denominators to P_{n+1} = P_n' u^2 - 2n P_n u' u + P_n u'.
fn bump_numerators(n: u32) -> Vec<Polynomial> {
    let u = Polynomial::from_i64(&[0, 1, -1]);
    let u2 = u.mul(&u);
    let up = Polynomial::from_i64(&[1, -2]);
    let up_u = up.mul(&u);
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Polynomial::one());
    for k in 0..n {
        let p = out.last().expect("non-empty");
        let next = p
            .derivative()
            .mul(&u2)
            .add(&p.mul(&up_u).scale(-2 * i64::from(k)))
            .add(&p.mul(&up));
        out.push(next);
    }
    out
}

/// Exact rational factor R_n with w_unnorm^{(n)} = R_n · w_unnorm on (0,1).
///
/// The denominator is the expanded power product (x(1−x))^{2n}.
pub fn bump_derivative_symbolic(n: u32) -> Result<RationalFunction> {
    if n > DERIVATIVE_CAP {
        return Err(Error::DerivativeCapExceeded {
            order: n,
            cap: DERIVATIVE_CAP,
        });
    }
    let numerator = bump_numerators(n).pop().expect("non-empty");
    let denominator = Polynomial::from_i64(&[0, 1, -1]).pow(2 * n);
    Ok(RationalFunction::new(numerator, denominator))
}

/// log |R_n(x) · exp(-1/(x(1-x)))| evaluated without intermediate
/// overflow: ln|P_n(x)| − 2n·ln(x(1−x)) − 1/(x(1−x)).
pub fn bump_derivative_log_abs(numerator: &Polynomial, n: u32, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let u = x * (1.0 - x);
    numerator.eval_f64(x).abs().ln() - 2.0 * f64::from(n) * u.ln() - 1.0 / u
}

/// ‖w^{(n)}‖_{L¹(0,1)} = ∫₀¹ |R_n(x)| exp(−1/(x(1−x))) dx / Z by adaptive
/// quadrature to relative 1e-10.
pub fn bump_derivative_l1(n: u32) -> Result<f64> {
    if n > DERIVATIVE_CAP {
        return Err(Error::DerivativeCapExceeded {
            order: n,
            cap: DERIVATIVE_CAP,
        });
    }
    let coeffs = bump_numerators(n).pop().expect("non-empty").to_f64_coeffs();
    let z = bump_normalizer();
    let two_n = 2.0 * f64::from(n);
    let f = move |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let u = x * (1.0 - x);
        (rational::horner(&coeffs, x).abs().ln() - two_n * u.ln() - 1.0 / u).exp()
    };
    let raw = quad::adaptive(&f, 0.0, 1.0, L1_REL_TOL)?;
    Ok(raw / z)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z_REFERENCE: f64 = 0.007029858406609656; // adaptive quadrature, cross-checked at 30 digits

    #[test]
    fn normalizer_value() {
        let w = WeightFunction::exponential_bump();
        let z = w.normalizer_z().unwrap();
        assert!((z - Z_REFERENCE).abs() < 1e-14, "Z = {z}");
    }

    #[test]
    fn eval_examples() {
        let bump = WeightFunction::exponential_bump();
        assert_eq!(bump.eval(0.0), 0.0);
        assert_eq!(bump.eval(1.0), 0.0);
        assert_eq!(bump.eval(-3.0), 0.0);
        // e^{-4}/Z at the midpoint
        let expect = (-4.0f64).exp() / Z_REFERENCE;
        assert!((bump.eval(0.5) - expect).abs() < 1e-12 * expect);

        let sin2 = WeightFunction::sin_squared();
        assert!((sin2.eval(0.25) - 1.0).abs() < 1e-15);
        assert_eq!(sin2.eval(1.0), 0.0);

        let uni = WeightFunction::uniform();
        assert_eq!(uni.eval(0.0), 1.0);
        assert_eq!(uni.eval(1.0), 0.0);
    }

    #[test]
    fn normalization_integral_is_one() {
        for w in [
            WeightFunction::uniform(),
            WeightFunction::sin_squared(),
            WeightFunction::exponential_bump(),
        ] {
            let total = quad::adaptive(&|x| w.eval(x), 0.0, 1.0, 1e-12).unwrap();
            assert!(
                (total - 1.0).abs() < 1e-10,
                "kind {:?}: integral {total}",
                w.kind()
            );
        }
    }

    #[test]
    fn weight_sum_examples() {
        assert_eq!(WeightFunction::uniform().sum(10), 10.0);
        // 2(sin^2 0 + sin^2 pi/4 + sin^2 pi/2 + sin^2 3pi/4) = 4
        assert!((WeightFunction::sin_squared().sum(4) - 4.0).abs() < 1e-14);
        let a = WeightFunction::exponential_bump().sum(1000);
        assert!((a / 1000.0 - 1.0).abs() < 1e-3, "A_N/N = {}", a / 1000.0);
    }

    #[test]
    fn symbolic_base_cases() {
        let r0 = bump_derivative_symbolic(0).unwrap();
        assert_eq!(r0.numerator, Polynomial::from_i64(&[1]));
        assert_eq!(r0.denominator, Polynomial::from_i64(&[1]));

        // R_1 = (1-2x)/(x(1-x))^2; the bump increases on (0, 1/2).
        let r1 = bump_derivative_symbolic(1).unwrap();
        assert_eq!(r1.numerator, Polynomial::from_i64(&[1, -2]));
        assert_eq!(
            r1.denominator,
            Polynomial::from_i64(&[0, 1, -1]).pow(2)
        );
        assert!(r1.eval(0.25) > 0.0);

        // One recurrence step, expanded exactly (cross-checked symbolically).
        let r2 = bump_derivative_symbolic(2).unwrap();
        assert_eq!(r2.numerator, Polynomial::from_i64(&[1, -6, 12, -12, 6]));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            bump_derivative_symbolic(13),
            Err(Error::DerivativeCapExceeded { order: 13, cap: 12 })
        ));
        assert!(bump_derivative_l1(13).is_err());
    }

    /// Central finite difference of order n with Richardson extrapolation.
    fn finite_difference(n: u32, x: f64, h: f64) -> f64 {
        let stencil = |h: f64| -> f64 {
            let mut acc = 0.0;
            for i in 0..=n {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let binom = (0..i).fold(1.0, |b, j| b * (n - j) as f64 / (j + 1) as f64);
                let offset = f64::from(n) / 2.0 - f64::from(i);
                acc += sign * binom * bump_unnormalized(x + offset * h);
            }
            acc / h.powi(n as i32)
        };
        let d1 = stencil(h);
        let d2 = stencil(h / 2.0);
        (4.0 * d2 - d1) / 3.0
    }

    #[test]
    fn recurrence_matches_finite_differences() {
        for n in 1..=4u32 {
            let sym = bump_derivative_symbolic(n).unwrap();
            let points: Vec<f64> = (1..=20).map(|i| i as f64 / 21.0).collect();
            let scale = points
                .iter()
                .map(|&x| (sym.eval(x) * bump_unnormalized(x)).abs())
                .fold(0.0, f64::max);
            for &x in &points {
                let exact = sym.eval(x) * bump_unnormalized(x);
                let fd = finite_difference(n, x, 1e-3);
                let denom = exact.abs().max(1e-4 * scale);
                assert!(
                    (fd - exact).abs() <= 1e-4 * denom,
                    "n={n} x={x}: fd={fd:e} exact={exact:e}"
                );
            }
        }
    }

    #[test]
    fn endpoint_flatness() {
        for n in 0..=DERIVATIVE_CAP {
            let p = bump_numerators(n).pop().unwrap();
            for x in [1e-3, 1.0 - 1e-3] {
                let log_abs = bump_derivative_log_abs(&p, n, x);
                assert!(
                    log_abs < -30.0 * std::f64::consts::LN_10,
                    "n={n} x={x}: log10 = {}",
                    log_abs / std::f64::consts::LN_10
                );
            }
        }
    }

    #[test]
    fn l1_examples() {
        assert!((bump_derivative_l1(0).unwrap() - 1.0).abs() < 1e-9);
        // Total variation of a unimodal density: 2 * peak = 2 e^{-4}/Z.
        let expect = 2.0 * (-4.0f64).exp() / Z_REFERENCE;
        let got = bump_derivative_l1(1).unwrap();
        assert!((got - expect).abs() < 1e-8 * expect, "got {got}");
        let v6 = bump_derivative_l1(6).unwrap();
        assert!(v6.is_finite() && v6 > 0.0);
        assert!(v6.ln() / (6.0 * 6.0f64.ln()) < 4.0);
    }

    #[test]
    fn l1_growth_ratio_bounded() {
        let mut max_ratio: f64 = 0.0;
        let mut prev = bump_derivative_l1(1).unwrap();
        for n in 2..=DERIVATIVE_CAP {
            let v = bump_derivative_l1(n).unwrap();
            assert!(v > prev, "L1 norms should grow: l1({n}) = {v}");
            prev = v;
            max_ratio = max_ratio.max(v.ln() / (f64::from(n) * f64::from(n).ln()));
        }
        // Empirical witness for the O(n^{n beta}) growth: measured max is
        // ~2.73 at n=2, settling near 1.5 from n=5 on.
        assert!(max_ratio < 3.0, "max ratio {max_ratio}");
    }
}
