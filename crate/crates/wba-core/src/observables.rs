//! Sparse Fourier-series observables on T^d.
//!
//! Coefficients live in a BTreeMap keyed by the integer frequency vector,
//! which fixes the evaluation order (and therefore the rounding) across
//! runs and platforms. Infinite series are realized at their stated
//! truncations; nothing here is a black-box pointwise function.

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::sum::CompensatedSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative ceiling on the imaginary residue of a real-valued evaluation.
const IM_RESIDUE_REL: f64 = 1e-12;

/// Guard on coefficient-ball enumeration for seeded observables.
const COEFF_GUARD: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierObservable {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
    real_valued: bool,
}

impl FourierObservable {
    /// Build from explicit coefficients, checking conjugate symmetry when
    /// the observable claims to be real-valued.
    pub fn from_coeffs(
        dim: usize,
        coeffs: BTreeMap<Vec<i64>, Complex64>,
        real_valued: bool,
    ) -> Result<Self> {
        for k in coeffs.keys() {
            if k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.len(),
                });
            }
        }
        if real_valued {
            for (k, &c) in &coeffs {
                let neg: Vec<i64> = k.iter().map(|&v| -v).collect();
                let mirror = coeffs.get(&neg).copied().unwrap_or(Complex64::ZERO);
                let diff = (mirror - c.conj()).norm();
                if diff > 1e-12 * c.norm().max(1e-300) {
                    return Err(Error::InvalidParameter(format!(
                        "real_valued observable breaks conjugate symmetry at k = {k:?}"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            coeffs,
            real_valued,
        })
    }

    /// A constant observable: only the zero coefficient.
    pub fn constant(dim: usize, value: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if value != 0.0 {
            coeffs.insert(vec![0; dim], Complex64::new(value, 0.0));
        }
        Self {
            dim,
            coeffs,
            real_valued: true,
        }
    }

    /// sin(2 pi theta_axis): coefficients -i/2 and +i/2 at +-e_axis.
    pub fn sin(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        let mut plus = vec![0i64; dim];
        plus[axis] = 1;
        let mut minus = vec![0i64; dim];
        minus[axis] = -1;
        let coeffs = BTreeMap::from([
            (plus, Complex64::new(0.0, -0.5)),
            (minus, Complex64::new(0.0, 0.5)),
        ]);
        Ok(Self {
            dim,
            coeffs,
            real_valued: true,
        })
    }

    /// The weak-regularity series sum_{k=1}^{kmax} k^{-2} sin(2 k pi x)
    /// on T^1, which sits below C^2 as kmax grows.
    pub fn weak_regularity_series(kmax: u32) -> Result<Self> {
        if kmax == 0 {
            return Err(Error::InvalidParameter("kmax must be >= 1".into()));
        }
        let mut coeffs = BTreeMap::new();
        for k in 1..=i64::from(kmax) {
            let mag = 0.5 / (k * k) as f64;
            coeffs.insert(vec![k], Complex64::new(0.0, -mag));
            coeffs.insert(vec![-k], Complex64::new(0.0, mag));
        }
        Ok(Self {
            dim: 1,
            coeffs,
            real_valued: true,
        })
    }

    /// Seeded analytic observable: |F_k| = exp(-2 pi sigma ||k||) exactly,
    /// phases from a splitmix64 stream (same seed, same observable, on
    /// every platform), conjugate symmetry enforced, F_0 a seeded real.
    pub fn random_analytic(dim: usize, sigma: f64, cutoff: u32, seed: u64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter("sigma must be > 0".into()));
        }
        let tail = (-2.0 * std::f64::consts::PI * sigma * f64::from(cutoff)).exp();
        if tail >= 1e-16 {
            return Err(Error::CutoffTooSmall {
                cutoff: cutoff as usize,
                sigma,
                tail,
            });
        }
        let mut ball_size: u128 = 1;
        for _ in 0..dim {
            ball_size = ball_size.saturating_mul(2 * u128::from(cutoff) + 1);
        }
        if ball_size > COEFF_GUARD {
            return Err(Error::GuardExceeded {
                what: format!("coefficient ball of {ball_size} entries"),
            });
        }
        // Canonical half of the ball (leading nonzero positive), in
        // lexicographic order; the mirror coefficient is the conjugate.
        let mut stream = SplitMix64::new(seed);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(
            vec![0i64; dim],
            Complex64::new(2.0 * stream.next_f64() - 1.0, 0.0),
        );
        let mut k = vec![-(i64::from(cutoff)); dim];
        loop {
            let norm: i64 = k.iter().map(|v| v.abs()).sum();
            if norm != 0
                && norm <= i64::from(cutoff)
                && k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
            {
                let mag = (-2.0 * std::f64::consts::PI * sigma * norm as f64).exp();
                let phase = 2.0 * std::f64::consts::PI * stream.next_f64();
                let c = Complex64::from_polar(mag, phase);
                coeffs.insert(k.clone(), c);
                coeffs.insert(k.iter().map(|&v| -v).collect(), c.conj());
            }
            // Odometer increment.
            let mut i = dim;
            loop {
                if i == 0 {
                    return Self::from_coeffs(dim, coeffs, true);
                }
                i -= 1;
                if k[i] < i64::from(cutoff) {
                    k[i] += 1;
                    break;
                }
                k[i] = -i64::from(cutoff);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.coeffs
    }

    /// Largest 1-norm over the stored support.
    pub fn max_frequency(&self) -> u64 {
        self.coeffs
            .keys()
            .map(|k| k.iter().map(|v| v.unsigned_abs()).sum())
            .max()
            .unwrap_or(0)
    }

    /// sum |F_k| over the stored support.
    pub fn coeff_abs_sum(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for c in self.coeffs.values() {
            acc.add(c.norm());
        }
        acc.value()
    }

    /// sum_k F_k e^{2 pi i k . theta}, compensated in map order.
    pub fn eval_complex(&self, theta: &[f64]) -> Result<Complex64> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (k, c) in &self.coeffs {
            let mut dot = 0.0;
            for (kk, tt) in k.iter().zip(theta) {
                dot += *kk as f64 * tt;
            }
            let arg = 2.0 * std::f64::consts::PI * dot;
            let e = Complex64::new(arg.cos(), arg.sin());
            let term = c * e;
            re.add(term.re);
            im.add(term.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// Real evaluation for real-valued observables; errors if the
    /// imaginary residue betrays broken conjugate symmetry.
    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        let v = self.eval_complex(theta)?;
        if self.real_valued {
            let ceiling = IM_RESIDUE_REL * self.coeff_abs_sum();
            if v.im.abs() > ceiling {
                return Err(Error::ImaginaryResidue { residue: v.im });
            }
        }
        Ok(v.re)
    }

    /// F_0, the spatial average (0 if absent).
    pub fn spatial_average(&self) -> Complex64 {
        self.coeffs
            .get(&vec![0i64; self.dim])
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    /// sum |F_k| e^{2 pi sigma ||k||}: the analyticity norm at width sigma.
    pub fn analytic_norm(&self, sigma: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (k, c) in &self.coeffs {
            let norm: u64 = k.iter().map(|v| v.unsigned_abs()).sum();
            acc.add(c.norm() * (2.0 * std::f64::consts::PI * sigma * norm as f64).exp());
        }
        acc.value()
    }

    /// The observable with coefficients F_k e^{2 pi i s k . rho}; evaluates
    /// to F(theta + s rho). Conjugate symmetry survives the rotation.
    pub fn rotate(&self, s: f64, rho: &[f64]) -> Result<Self> {
        if rho.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.len(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let mut dot = 0.0;
                for (kk, rr) in k.iter().zip(rho) {
                    dot += *kk as f64 * rr;
                }
                let arg = 2.0 * std::f64::consts::PI * s * dot;
                (k.clone(), c * Complex64::new(arg.cos(), arg.sin()))
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            coeffs,
            real_valued: self.real_valued,
        })
    }
}

/// splitmix64: 64-bit state, golden-gamma increment, two xor-shift
/// multiplies. The stream is part of the wire contract for seeded
/// fixtures, so it is spelled out here rather than pulled from a crate.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Decay families against which stored coefficients are audited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DecayFamily {
    TrigPoly,
    PolynomialDecay { m: f64 },
    Analytic { sigma: f64 },
}

impl DecayFamily {
    /// The approximation function tilde-Delta paired with the family.
    pub fn gauge(&self, norm: f64) -> f64 {
        match self {
            Self::TrigPoly => 1.0,
            Self::PolynomialDecay { m } => norm.powf(*m),
            Self::Analytic { sigma } => (2.0 * std::f64::consts::PI * sigma * norm).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    #[serde(flatten)]
    pub family: DecayFamily,
    /// Largest stored 1-norm admitted by the spec.
    pub cutoff: u32,
}

/// Outcome of the membership functional sup tilde-Delta(||k||) |F_k|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub sup: f64,
    pub attained_at: Vec<i64>,
    /// Support found beyond the spec cutoff (always a failure).
    pub support_overflow: bool,
    pub pass: bool,
}

/// Audit the stored coefficients against a decay specification with a
/// supplied ceiling on the membership functional.
pub fn decay_audit(f: &FourierObservable, spec: &DecaySpec, ceiling: f64) -> DecayReport {
    let mut sup = 0.0_f64;
    let mut attained_at = Vec::new();
    let mut support_overflow = false;
    for (k, c) in f.coeffs() {
        let norm: u64 = k.iter().map(|v| v.unsigned_abs()).sum();
        if norm == 0 {
            continue;
        }
        if norm > u64::from(spec.cutoff) && c.norm() > 0.0 {
            support_overflow = true;
        }
        let weighted = spec.family.gauge(norm as f64) * c.norm();
        if weighted > sup {
            sup = weighted;
            attained_at = k.clone();
        }
    }
    DecayReport {
        sup,
        attained_at,
        support_overflow,
        pass: sup <= ceiling && !support_overflow,
    }
}

// --- JSON wire format -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffRecord {
    k: Vec<i64>,
    #[serde(with = "hexfloat::serde_hex")]
    re: f64,
    #[serde(with = "hexfloat::serde_hex")]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ObservableRecord {
    dim: usize,
    real_valued: bool,
    coeffs: Vec<CoeffRecord>,
}

impl Serialize for FourierObservable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ObservableRecord {
            dim: self.dim,
            real_valued: self.real_valued,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| CoeffRecord {
                    k: k.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierObservable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = ObservableRecord::deserialize(d)?;
        let coeffs = rec
            .coeffs
            .into_iter()
            .map(|c| (c.k, Complex64::new(c.re, c.im)))
            .collect();
        Self::from_coeffs(rec.dim, coeffs, rec.real_valued).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sin_evaluations() {
        let f = FourierObservable::sin(1, 0).unwrap();
        assert!((f.eval(&[0.25]).unwrap() - 1.0).abs() < 1e-15);
        assert!(f.eval(&[0.0]).unwrap().abs() < 1e-15);
        assert!((f.eval(&[0.125]).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(f.spatial_average(), Complex64::ZERO);
        assert!(FourierObservable::sin(1, 1).is_err());
    }

    #[test]
    fn periodicity() {
        let f = FourierObservable::sin(2, 1).unwrap();
        let a = f.eval(&[0.3, 0.77]).unwrap();
        let b = f.eval(&[0.3, 1.77]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn constant_observable() {
        let c = FourierObservable::constant(3, 2.5);
        assert_eq!(c.eval(&[0.1, 0.9, 0.4]).unwrap(), 2.5);
        assert_eq!(c.spatial_average().re, 2.5);
    }

    #[test]
    fn weak_series_matches_direct_sum() {
        let f = FourierObservable::weak_regularity_series(100).unwrap();
        assert!(f.eval(&[0.0]).unwrap().abs() < 1e-14);
        assert_eq!(f.spatial_average(), Complex64::ZERO);
        // Direct 100-term sine summation as the oracle.
        let theta = 0.1;
        let mut direct = 0.0;
        for k in 1..=100u32 {
            let k = f64::from(k);
            direct += (2.0 * k * std::f64::consts::PI * theta).sin() / (k * k);
        }
        assert!((f.eval(&[theta]).unwrap() - direct).abs() < 1e-13);

        let single = FourierObservable::weak_regularity_series(1).unwrap();
        assert_eq!(single.coeffs(), FourierObservable::sin(1, 0).unwrap().coeffs());
    }

    #[test]
    fn random_analytic_is_deterministic() {
        let a = FourierObservable::random_analytic(1, 0.5, 12, 42).unwrap();
        let b = FourierObservable::random_analytic(1, 0.5, 12, 42).unwrap();
        assert_eq!(a, b);
        let c = FourierObservable::random_analytic(1, 0.5, 12, 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.spatial_average(), a.coeffs()[&vec![0]]);
    }

    #[test]
    fn random_analytic_norm_identity() {
        let sigma = 0.5;
        let f = FourierObservable::random_analytic(1, sigma, 12, 7).unwrap();
        // At width sigma/2 the norm telescopes to |F_0| + sum e^{-pi sigma ||k||}.
        let mut expect = f.spatial_average().norm();
        for k in f.coeffs().keys() {
            let n: u64 = k.iter().map(|v| v.unsigned_abs()).sum();
            if n > 0 {
                expect += (-std::f64::consts::PI * sigma * n as f64).exp();
            }
        }
        let got = f.analytic_norm(sigma / 2.0);
        assert!((got - expect).abs() < 1e-12 * expect, "got {got}, expect {expect}");
    }

    #[test]
    fn random_analytic_cutoff_guard() {
        assert!(matches!(
            FourierObservable::random_analytic(1, 0.5, 5, 1),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn decay_audit_examples() {
        let sin = FourierObservable::sin(1, 0).unwrap();
        let sigma = 0.3;
        let rep = decay_audit(
            &sin,
            &DecaySpec {
                family: DecayFamily::Analytic { sigma },
                cutoff: 1,
            },
            10.0,
        );
        let expect = 0.5 * (2.0 * std::f64::consts::PI * sigma).exp();
        assert!((rep.sup - expect).abs() < 1e-12);
        assert!(rep.pass);

        let weak = FourierObservable::weak_regularity_series(100).unwrap();
        let rep2 = decay_audit(
            &weak,
            &DecaySpec {
                family: DecayFamily::PolynomialDecay { m: 2.0 },
                cutoff: 100,
            },
            1.0,
        );
        assert!((rep2.sup - 0.5).abs() < 1e-12, "sup {}", rep2.sup);
        assert!(rep2.pass);

        // M = 3 grows with the cutoff: k^3 / (2 k^2) peaks at k = 100.
        let rep3 = decay_audit(
            &weak,
            &DecaySpec {
                family: DecayFamily::PolynomialDecay { m: 3.0 },
                cutoff: 100,
            },
            10.0,
        );
        assert!((rep3.sup - 50.0).abs() < 1e-10, "sup {}", rep3.sup);
        assert_eq!(rep3.attained_at.first().map(|v| v.abs()), Some(100));
        assert!(!rep3.pass);
    }

    #[test]
    fn parseval_spot_check() {
        let f = FourierObservable::random_analytic(1, 0.5, 12, 5).unwrap();
        let p = 32usize; // > 2 * cutoff
        let mut grid_power = CompensatedSum::new();
        for i in 0..p {
            let v = f.eval_complex(&[i as f64 / p as f64]).unwrap();
            grid_power.add(v.norm_sqr());
        }
        let lhs = grid_power.value() / p as f64;
        let mut rhs = CompensatedSum::new();
        for c in f.coeffs().values() {
            rhs.add(c.norm_sqr());
        }
        let rhs = rhs.value();
        assert!((lhs - rhs).abs() < 1e-12 * rhs, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn real_valuedness_bound() {
        let f = FourierObservable::random_analytic(2, 0.5, 12, 11).unwrap();
        let ceiling = 1e-12 * f.coeff_abs_sum();
        let mut rng = SplitMix64::new(999);
        for _ in 0..100 {
            let theta = [rng.next_f64(), rng.next_f64()];
            let v = f.eval_complex(&theta).unwrap();
            assert!(v.im.abs() < ceiling, "residue {}", v.im);
        }
    }

    #[test]
    fn translation_identity() {
        let f = FourierObservable::random_analytic(1, 0.4, 15, 3).unwrap();
        let rho = [(5.0_f64.sqrt() - 1.0) / 2.0];
        let s = 17.0;
        let theta = [0.31];
        let direct = f.eval_complex(&[theta[0] + s * rho[0]]).unwrap();
        let rotated = f.rotate(s, &rho).unwrap().eval_complex(&theta).unwrap();
        assert!(
            (direct - rotated).norm() < 1e-12 * f.coeff_abs_sum(),
            "direct {direct}, rotated {rotated}"
        );
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let coeffs = BTreeMap::from([
            (vec![1i64], Complex64::new(0.3, 0.1)),
            (vec![-1i64], Complex64::new(0.3, 0.1)), // not the conjugate
        ]);
        assert!(FourierObservable::from_coeffs(1, coeffs, true).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let f = FourierObservable::random_analytic(1, 0.5, 12, 77).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: FourierObservable = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
        for (k, c) in f.coeffs() {
            let b = back.coeffs()[k];
            assert_eq!(c.re.to_bits(), b.re.to_bits());
            assert_eq!(c.im.to_bits(), b.im.to_bits());
        }
    }

    proptest! {
        #[test]
        fn splitmix_stream_is_uniformish(seed in any::<u64>()) {
            let mut s = SplitMix64::new(seed);
            let mut acc = 0.0;
            for _ in 0..256 {
                let v = s.next_f64();
                prop_assert!((0.0..1.0).contains(&v));
                acc += v;
            }
            prop_assert!((acc / 256.0 - 0.5).abs() < 0.2);
        }
    }
}
