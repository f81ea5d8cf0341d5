//! Finite-support integer vectors with the eta-weighted norm
//! |k|_eta = sum <j>^eta |k_j|, <j> = max(1, |j|), and shell enumeration.
//!
//! Every computation on the infinite-dimensional lattice touches finitely
//! many coordinates, so vectors are carried in sparse form only.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Combinatorial guard on the shell level nu.
pub const SHELL_GUARD: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeVector {
    entries: BTreeMap<u32, i64>,
    eta: u32,
}

impl LatticeVector {
    pub fn new(entries: BTreeMap<u32, i64>, eta: u32) -> Result<Self> {
        if eta < 2 {
            return Err(Error::InvalidParameter("eta must be >= 2".into()));
        }
        if entries.values().any(|&v| v == 0) {
            return Err(Error::InvalidParameter(
                "stored lattice entries must be nonzero".into(),
            ));
        }
        Ok(Self { entries, eta })
    }

    pub fn unit(index: u32, value: i64, eta: u32) -> Result<Self> {
        Self::new(BTreeMap::from([(index, value)]), eta)
    }

    pub fn entries(&self) -> &BTreeMap<u32, i64> {
        &self.entries
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// <j> = max(1, |j|).
    fn bracket(j: u32) -> u64 {
        u64::from(j.max(1))
    }

    /// |k|_eta = sum <j>^eta |k_j|.
    pub fn eta_norm(&self) -> u64 {
        self.entries
            .iter()
            .map(|(&j, &v)| Self::bracket(j).pow(self.eta) * v.unsigned_abs())
            .sum()
    }

    /// prod over the support of (1 + |k_j|^mu <j>^mu); empty product is 1.
    pub fn theta_product(&self, mu: f64) -> f64 {
        self.entries
            .iter()
            .map(|(&j, &v)| 1.0 + (v.unsigned_abs() as f64).powf(mu) * (Self::bracket(j) as f64).powf(mu))
            .product()
    }

    pub fn max_support_index(&self) -> Option<u32> {
        self.entries.keys().next_back().copied()
    }
}

/// All k with |k|_eta exactly nu, ordered by (max support index, entries).
///
/// Support indices are bounded by <j>^eta <= nu, i.e. j <= nu^(1/eta).
pub fn enumerate_eta_shell(eta: u32, nu: u32) -> Result<Vec<LatticeVector>> {
    if eta < 2 {
        return Err(Error::InvalidParameter("eta must be >= 2".into()));
    }
    if nu > SHELL_GUARD {
        return Err(Error::GuardExceeded {
            what: format!("shell level {nu} over guard {SHELL_GUARD}"),
        });
    }
    if nu == 0 {
        return Ok(Vec::new());
    }
    let mut jmax = 0u32;
    while LatticeVector::bracket(jmax + 1).pow(eta) <= u64::from(nu) {
        jmax += 1;
    }
    let mut out = Vec::new();
    let mut entries: Vec<(u32, i64)> = Vec::new();
    assign_shell(eta, nu as i64, 0, jmax, &mut entries, &mut out);
    out.sort_by(|a, b| {
        let ma = a.max_support_index();
        let mb = b.max_support_index();
        ma.cmp(&mb).then_with(|| {
            let va: Vec<i64> = (0..=jmax).map(|j| *a.entries.get(&j).unwrap_or(&0)).collect();
            let vb: Vec<i64> = (0..=jmax).map(|j| *b.entries.get(&j).unwrap_or(&0)).collect();
            va.cmp(&vb)
        })
    });
    Ok(out)
}

fn assign_shell(
    eta: u32,
    remaining: i64,
    j: u32,
    jmax: u32,
    entries: &mut Vec<(u32, i64)>,
    out: &mut Vec<LatticeVector>,
) {
    if remaining == 0 {
        if !entries.is_empty() {
            out.push(LatticeVector {
                entries: entries.iter().copied().collect(),
                eta,
            });
        }
        return;
    }
    if j > jmax {
        return;
    }
    let weight = LatticeVector::bracket(j).pow(eta) as i64;
    let max_mag = remaining / weight;
    for mag in 0..=max_mag {
        if mag == 0 {
            assign_shell(eta, remaining, j + 1, jmax, entries, out);
        } else {
            for sign in [1i64, -1] {
                entries.push((j, sign * mag));
                assign_shell(eta, remaining - mag * weight, j + 1, jmax, entries, out);
                entries.pop();
            }
        }
    }
}

/// |{k : |k|_eta = nu}| without materializing the vectors.
pub fn shell_count(eta: u32, nu: u32) -> Result<u64> {
    Ok(enumerate_eta_shell(eta, nu)?.len() as u64)
}

/// sup over 0 < |k|_eta <= n_max of theta_product(k, eta) (mu = eta).
pub fn sup_theta_over_ball(eta: u32, n_max: u32) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("ball radius must be >= 1".into()));
    }
    let mut sup = 0.0_f64;
    for nu in 1..=n_max {
        for k in enumerate_eta_shell(eta, nu)? {
            sup = sup.max(k.theta_product(f64::from(eta)));
        }
    }
    Ok(sup)
}
