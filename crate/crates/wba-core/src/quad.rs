//! Gauss–Legendre quadrature: fixed rules, composite panels, and an
//! h-adaptive driver used for the weight normalizer and derivative norms.

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// A Gauss–Legendre rule on [-1, 1].
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration from the Chebyshev initial guess; deterministic for fixed `n`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least 2 nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            // Newton on P_n(x); Bonnet recurrence gives P_n and P_n'.
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f, mapped affinely from [-1, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = CompensatedSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite rule: `panels` equal panels of the given rule across [a, b],
/// accumulated in panel order with compensation.
pub fn composite<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    let mut acc = CompensatedSum::new();
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let hi = if p + 1 == panels { b } else { lo + h };
        acc.add(rule.integrate(lo, hi, &mut f));
    }
    acc.value()
}

/// h-adaptive panel bisection with a fixed rule per panel.
///
/// A panel is accepted when the two-half estimate agrees with the
/// whole-panel estimate within its share of the tolerance. Errors out if
/// the requested relative tolerance is not reached before the depth cap.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let rule = GaussLegendre::new(15);
    // Rough scale from a coarse composite pass; the tolerance is relative
    // to the final magnitude, so re-derive the floor from it.
    let scale = composite(&rule, a, b, 16, f).abs().max(f64::MIN_POSITIVE);
    let abs_tol = rel_tol * scale;
    let mut acc = CompensatedSum::new();
    adaptive_panel(f, &rule, a, b, abs_tol, 52, &mut acc)?;
    Ok(acc.value())
}

fn adaptive_panel<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    acc: &mut CompensatedSum,
) -> Result<()> {
    let whole = rule.integrate(a, b, f);
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    let diff = (left + right - whole).abs();
    // The estimate cannot resolve below the rounding floor of the panel
    // values themselves; without this floor, noisy panels split forever.
    let floor = 50.0 * f64::EPSILON * (left.abs() + right.abs());
    if diff <= tol.max(floor) || (b - a) < 1e-15 {
        acc.add(left);
        acc.add(right);
        return Ok(());
    }
    if depth == 0 {
        return Err(Error::QuadratureNonConvergence { tol });
    }
    adaptive_panel(f, rule, a, mid, 0.5 * tol, depth - 1, acc)?;
    adaptive_panel(f, rule, mid, b, 0.5 * tol, depth - 1, acc)
}
