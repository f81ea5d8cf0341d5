//! Exact integer-coefficient polynomials and rational functions.
//!
//! Carrier for the symbolic derivatives of the exponential weight: float
//! differentiation of the bump cancels catastrophically past order ~4, so
//! the recurrence runs on arbitrary-precision integers and only the final
//! evaluation drops to `f64`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Dense polynomial with `BigInt` coefficients, ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::ZERO);
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![BigInt::ZERO]);
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        Self::new(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::ZERO; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![BigInt::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * BigInt::from(k)).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Horner evaluation in f64. Coefficients above f64 range saturate;
    /// callers on the bump path stay below order 12 where the largest
    /// coefficient is ~2.2e16.
    pub fn eval_f64(&self, x: f64) -> f64 {
        horner(&self.to_f64_coeffs(), x)
    }

    /// Coefficients converted once for hot evaluation loops.
    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }

    /// Largest coefficient magnitude, as bits.
    pub fn max_coeff_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
    }
}

/// Ascending-degree Horner evaluation.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Exact quotient of integer polynomials. No GCD reduction is performed;
/// the derivative recurrence keeps denominators in the power-product form
/// (x(1-x))^m which never vanishes on (0,1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

impl RationalFunction {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        Self {
            numerator,
            denominator,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.numerator.eval_f64(x) / self.denominator.eval_f64(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_and_mul() {
        // (1 + 2x + 3x^2)' = 2 + 6x
        let p = Polynomial::from_i64(&[1, 2, 3]);
        assert_eq!(p.derivative(), Polynomial::from_i64(&[2, 6]));
        // (1+x)(1-x) = 1 - x^2
        let a = Polynomial::from_i64(&[1, 1]);
        let b = Polynomial::from_i64(&[1, -1]);
        assert_eq!(a.mul(&b), Polynomial::from_i64(&[1, 0, -1]));
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let u = Polynomial::from_i64(&[0, 1, -1]); // x - x^2
        let mut byhand = Polynomial::one();
        for _ in 0..4 {
            byhand = byhand.mul(&u);
        }
        assert_eq!(u.pow(4), byhand);
    }

    #[test]
    fn eval_matches_horner_by_hand() {
        let p = Polynomial::from_i64(&[1, -6, 12, -12, 6]);
        let x = 0.37f64;
        let direct = 1.0 - 6.0 * x + 12.0 * x * x - 12.0 * x.powi(3) + 6.0 * x.powi(4);
        assert!((p.eval_f64(x) - direct).abs() < 1e-15);
    }
}
