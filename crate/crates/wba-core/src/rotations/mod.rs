//! Rotation vectors, joint rotations, and small-divisor diagnostics.
//!
//! Discrete dynamics and discrete divisor scans reduce phases mod 1;
//! continuous (flow) quantities use the phases as given, so frequency
//! vectors like (4+pi)/2 keep their integer part. Tagged constants are
//! recomputed from their defining formulas rather than parsed decimals.

mod lattice;

pub use lattice::{
    enumerate_eta_shell, shell_count, sup_theta_over_ball, LatticeVector, SHELL_GUARD,
};

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scan guard: largest admissible candidate count for divisor scans.
pub const SCAN_GUARD: u128 = 100_000_000;

/// Continued-fraction horizon where double precision stops resolving
/// partial quotients reliably.
pub const CF_MAX_TERMS: usize = 40;

/// A rotation vector on T^d (phases may carry an integer part; it only
/// matters for continuous-time quantities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationVector {
    phases: Vec<f64>,
    tag: Option<String>,
}

impl RotationVector {
    pub fn from_phases(phases: Vec<f64>) -> Self {
        Self { phases, tag: None }
    }

    pub fn scalar(phase: f64) -> Self {
        Self::from_phases(vec![phase])
    }

    /// (sqrt(5) - 1)/2, the golden rotation.
    pub fn golden() -> Self {
        Self {
            phases: vec![(5.0_f64.sqrt() - 1.0) / 2.0],
            tag: Some("golden".into()),
        }
    }

    /// The truncation 0.010010001 = 10^-2 + 10^-5 + 10^-9 printed in the
    /// weak-irrationality experiment.
    pub fn liouville_trunc() -> Self {
        Self {
            phases: vec![1e-2 + 1e-5 + 1e-9],
            tag: Some("liouville_trunc".into()),
        }
    }

    /// The Liouville-type value 0.1001000100001... with ones at decimal
    /// places 1, 4, 8, 13, ... (gaps 3, 4, 5, ...), summed to double
    /// precision.
    pub fn liouville() -> Self {
        let mut v = 0.0;
        let mut place = 1u32;
        let mut gap = 3u32;
        loop {
            let term = 10f64.powi(-(place as i32));
            if term < 1e-18 {
                break;
            }
            v += term;
            place += gap;
            gap += 1;
        }
        Self {
            phases: vec![v],
            tag: Some("liouville".into()),
        }
    }

    pub fn rational(p: i64, q: u64) -> Self {
        assert!(q > 0, "rational tag needs q > 0");
        Self {
            phases: vec![p as f64 / q as f64],
            tag: Some(format!("rational {p}/{q}")),
        }
    }

    /// Parse a phase entry: a tag name or a decimal literal.
    pub fn parse_phase(s: &str) -> Result<f64> {
        match s {
            "golden" => Ok(Self::golden().phases[0]),
            "liouville_trunc" => Ok(Self::liouville_trunc().phases[0]),
            "liouville" => Ok(Self::liouville().phases[0]),
            _ => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad phase {s:?}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }
}

/// ell rotation vectors of common dimension d, with the concatenated
/// joint vector in T^{d*ell}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRotation {
    components: Vec<RotationVector>,
    joint: Vec<f64>,
}

impl JointRotation {
    pub fn new(components: Vec<RotationVector>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidParameter("need at least one rotation".into()));
        };
        let d = first.dim();
        for c in &components {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.dim(),
                });
            }
        }
        let joint = components
            .iter()
            .flat_map(|c| c.phases().iter().copied())
            .collect();
        Ok(Self { components, joint })
    }

    pub fn ell(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[RotationVector] {
        &self.components
    }

    /// The concatenation (rho_1, ..., rho_ell), as given.
    pub fn joint(&self) -> &[f64] {
        &self.joint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMode {
    #[serde(rename = "discrete")]
    Discrete,
    #[serde(rename = "continuous")]
    Continuous,
}

/// Result of an exhaustive small-divisor scan over 0 != k, ||k||_1 <= K.
///
/// Vectors supported entirely on trivial phases (phase = 0 for the
/// continuous mode; integer phase for the discrete mode) are skipped:
/// their dot products are integers by construction and carry no
/// information about the rotation's irrational structure. Signs are
/// folded (k and -k give the same divisor); the reported argmin has a
/// positive leading entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorScan {
    #[serde(rename = "K")]
    pub k_max: u32,
    pub mode: ScanMode,
    pub min_divisor: f64,
    pub argmin_k: Vec<i64>,
    pub alpha_estimate: f64,
    /// Nearest integer at the argmin (discrete mode).
    #[serde(skip)]
    pub argmin_n: i64,
}

/// Points of Z^D with 1-norm <= K: sum_i 2^i C(D,i) C(K,i).
pub(crate) fn one_norm_ball_count(dim: u32, k: u32) -> u128 {
    let mut total: u128 = 0;
    let top = dim.min(k);
    for i in 0..=top {
        let mut term: u128 = 1u128 << i;
        for j in 0..i {
            term = term.saturating_mul(u128::from(dim - j)).saturating_div(u128::from(j + 1));
        }
        // C(D,i) computed above; multiply by C(K,i).
        let mut binom_k: u128 = 1;
        for j in 0..i {
            binom_k = binom_k.saturating_mul(u128::from(k - j)) / u128::from(j + 1);
        }
        total = total.saturating_add(term.saturating_mul(binom_k));
    }
    total
}

fn round_half_away(x: f64) -> f64 {
    // f64::round rounds half away from zero.
    x.round()
}

struct ScanBest {
    divisor: f64,
    alpha: f64,
    k: Vec<i64>,
    n: i64,
}

impl ScanBest {
    fn empty() -> Self {
        Self {
            divisor: f64::INFINITY,
            alpha: f64::INFINITY,
            k: Vec::new(),
            n: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if other.divisor < self.divisor
            || (other.divisor == self.divisor && other.k < self.k)
        {
            self.divisor = other.divisor;
            self.k = other.k;
            self.n = other.n;
        }
        self.alpha = self.alpha.min(other.alpha);
        self
    }
}

/// Walk all 0 != k with ||k||_1 <= K whose leading nonzero entry is
/// positive, in lexicographic order, restricted to vectors touching at
/// least one nontrivial phase.
fn scan_range(
    rho: &[f64],
    trivial: &[bool],
    k_max: u32,
    mode: ScanMode,
    tau: f64,
    first_coord: i64,
) -> ScanBest {
    let dim = rho.len();
    let mut k = vec![0i64; dim];
    k[0] = first_coord;
    let mut best = ScanBest::empty();
    let budget = k_max as i64 - first_coord.abs();
    let dot0 = first_coord as f64 * rho[0];
    let touched0 = first_coord != 0 && !trivial[0];
    descend(
        rho, trivial, mode, tau, &mut k, 1, budget, dot0, touched0, first_coord != 0, &mut best,
    );
    best
}

#[allow(clippy::too_many_arguments)]
fn descend(
    rho: &[f64],
    trivial: &[bool],
    mode: ScanMode,
    tau: f64,
    k: &mut Vec<i64>,
    idx: usize,
    budget: i64,
    dot: f64,
    touched: bool,
    nonzero_seen: bool,
    best: &mut ScanBest,
) {
    if idx == rho.len() {
        if !nonzero_seen || !touched {
            return;
        }
        let (divisor, n) = match mode {
            ScanMode::Discrete => {
                let n = round_half_away(dot);
                ((dot - n).abs(), n as i64)
            }
            ScanMode::Continuous => (dot.abs(), 0),
        };
        let norm: i64 = k.iter().map(|v| v.abs()).sum();
        let alpha = if tau == 0.0 {
            divisor
        } else {
            divisor * (norm as f64).powf(tau)
        };
        let better = divisor < best.divisor
            || (divisor == best.divisor && (best.k.is_empty() || k.as_slice() < best.k.as_slice()));
        if better {
            best.divisor = divisor;
            best.k = k.clone();
            best.n = n;
        }
        if alpha < best.alpha {
            best.alpha = alpha;
        }
        return;
    }
    // Canonical representatives: entries before the first nonzero stay 0.
    let lo = if nonzero_seen { -budget } else { 0 };
    for v in lo..=budget {
        k[idx] = v;
        descend(
            rho,
            trivial,
            mode,
            tau,
            k,
            idx + 1,
            budget - v.abs(),
            dot + v as f64 * rho[idx],
            touched || (v != 0 && !trivial[idx]),
            nonzero_seen || v != 0,
            best,
        );
    }
    k[idx] = 0;
}

/// Exhaustive scan of 0 != k in Z^{d*ell} with ||k||_1 <= K, recording the
/// smallest divisor and the Diophantine witness min |k.rho - n| ||k||^tau.
pub fn divisor_scan(
    joint: &JointRotation,
    k_max: u32,
    mode: ScanMode,
    tau: f64,
) -> Result<DivisorScan> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("scan needs K >= 1".into()));
    }
    let rho = joint.joint();
    let dim = rho.len() as u32;
    let candidates = one_norm_ball_count(dim, k_max);
    if candidates > SCAN_GUARD {
        return Err(Error::BallTooLarge {
            candidates,
            guard: SCAN_GUARD,
        });
    }
    let trivial: Vec<bool> = rho
        .iter()
        .map(|&r| match mode {
            ScanMode::Discrete => r.fract() == 0.0,
            ScanMode::Continuous => r == 0.0,
        })
        .collect();
    if trivial.iter().all(|&t| t) {
        return Err(Error::InvalidParameter(
            "every phase is trivial for this mode; the scan carries no information".into(),
        ));
    }
    // Leading coordinate ranges 0..=K (canonical sign); parallel over it
    // with a deterministic merge.
    let best = (0..=k_max as i64)
        .into_par_iter()
        .map(|c0| scan_range(rho, &trivial, k_max, mode, tau, c0))
        .reduce(ScanBest::empty, ScanBest::merge);
    Ok(DivisorScan {
        k_max,
        mode,
        min_divisor: best.divisor,
        argmin_k: best.k,
        alpha_estimate: best.alpha,
        argmin_n: best.n,
    })
}

/// Smallest divisor over the ball (the raw minimum; alpha with tau = 0).
pub fn smallest_divisor(joint: &JointRotation, k_max: u32, mode: ScanMode) -> Result<DivisorScan> {
    divisor_scan(joint, k_max, mode, 0.0)
}

/// alpha_K = min over the scan of |k.rho - n| ||k||^tau (discrete) or
/// |k.rho| ||k||^tau (continuous); nonincreasing in K.
pub fn diophantine_witness(
    joint: &JointRotation,
    k_max: u32,
    tau: f64,
    mode: ScanMode,
) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::InvalidParameter("tau must be >= 0".into()));
    }
    Ok(divisor_scan(joint, k_max, mode, tau)?.alpha_estimate)
}

/// Continued-fraction expansion of x in (0,1): partial quotients and the
/// convergents p_l/q_l. Stops early once the remainder is numerically
/// rational or the convergents overflow.
pub fn continued_fraction(x: f64, terms: usize) -> Result<(Vec<u64>, Vec<(u128, u128)>)> {
    if !(0.0..1.0).contains(&x) || x == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "continued fraction needs x in (0,1), got {x}"
        )));
    }
    if terms == 0 || terms > CF_MAX_TERMS {
        return Err(Error::InvalidParameter(format!(
            "terms must be in 1..={CF_MAX_TERMS}"
        )));
    }
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    // p_{-1}/q_{-1} = 1/0 and p_0/q_0 = 0/1 seed the recursion for a
    // number with vanishing integer part.
    let (mut p_prev, mut q_prev): (u128, u128) = (1, 0);
    let (mut p, mut q): (u128, u128) = (0, 1);
    let mut rem = x;
    for _ in 0..terms {
        let inv = 1.0 / rem;
        let a = inv.floor();
        if !(1.0..9.2e18).contains(&a) {
            break;
        }
        let a_int = a as u64;
        let (Some(p_next), Some(q_next)) = (
            u128::from(a_int)
                .checked_mul(p)
                .and_then(|v| v.checked_add(p_prev)),
            u128::from(a_int)
                .checked_mul(q)
                .and_then(|v| v.checked_add(q_prev)),
        ) else {
            break;
        };
        quotients.push(a_int);
        convergents.push((p_next, q_next));
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        rem = inv - a;
        if rem < 1e-12 {
            break;
        }
        rem = rem.min(1.0);
    }
    Ok((quotients, convergents))
}
