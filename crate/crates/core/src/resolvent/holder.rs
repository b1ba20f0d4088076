//! Cauchy behaviour of `<x>^{-s} R0(mu + i eps) <x>^{-s}` as `eps -> 0`.

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::lattice::{ComplexEnergy, LatticeBox};
use crate::resolvent::kernel::KernelTable;
use crate::resolvent::weighted::{box_table, weighted_table_norm, WeightedNormConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderClass {
    Cauchy,
    Divergent,
    Inconclusive,
}

pub type HolderConfig = WeightedNormConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub s: f64,
    pub mu: f64,
    pub d: usize,
    pub radius: usize,
    pub eps_pairs: Vec<[f64; 2]>,
    #[serde(rename = "M_values")]
    pub m_values: Vec<f64>,
    /// Slope of `log M` against `log eps`.
    pub fitted_exponent: f64,
    pub fit_residual: f64,
    /// Geometric bound on the remaining distance to the boundary value,
    /// when the fitted exponent is positive.
    pub tail_estimate: Option<f64>,
    pub classification: HolderClass,
}

fn difference(a: &KernelTable, b: &KernelTable) -> KernelTable {
    KernelTable {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
        error_estimate: a.error_estimate + b.error_estimate,
        ..a.clone()
    }
}

/// `M_k = ||<x>^{-s} (R0(mu + i eps_k) - R0(mu + i eps_{k+1})) <x>^{-s}||`
/// along consecutive pairs of a non-increasing ladder.
pub fn boundary_value_continuity(
    s: f64,
    mu: f64,
    eps_list: &[f64],
    bx: &LatticeBox,
    cfg: &HolderConfig,
) -> Result<HolderReport> {
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("weight exponent s = {s} must be positive")));
    }
    if eps_list.len() < 2 || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("need at least two positive eps values".into()));
    }
    if eps_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("eps list must be non-increasing".into()));
    }
    let tables = eps_list
        .iter()
        .map(|&e| box_table(bx, ComplexEnergy::new(mu, e), cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut m_values = Vec::with_capacity(eps_list.len() - 1);
    for (k, w) in tables.windows(2).enumerate() {
        let m = if eps_list[k] == eps_list[k + 1] {
            0.0
        } else {
            weighted_table_norm(bx, &difference(&w[0], &w[1]), s, s, cfg.seed ^ k as u64)?.0
        };
        m_values.push(m);
    }
    let eps_pairs: Vec<[f64; 2]> = eps_list.windows(2).map(|w| [w[0], w[1]]).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = eps_pairs
        .iter()
        .zip(&m_values)
        .filter(|(_, &m)| m > 0.0)
        .map(|(p, &m)| (p[0], m))
        .unzip();
    let (fitted_exponent, fit_residual) = if xs.len() >= 2 {
        let f = loglog_fit(&xs, &ys);
        (f.slope, f.residual)
    } else {
        (f64::NAN, f64::NAN)
    };
    let monotone = m_values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let classification = if m_values.iter().all(|&m| m == 0.0) || (monotone && fitted_exponent > 0.0) {
        HolderClass::Cauchy
    } else if fitted_exponent < 0.0 {
        HolderClass::Divergent
    } else {
        HolderClass::Inconclusive
    };
    let tail_estimate = match (m_values.last(), eps_list.len()) {
        (Some(&m), n) if fitted_exponent > 0.0 => {
            let q = (eps_list[n - 1] / eps_list[n - 2]).powf(fitted_exponent);
            (q < 1.0).then(|| m * q / (1.0 - q))
        }
        _ => None,
    };
    Ok(HolderReport {
        s,
        mu,
        d: bx.d,
        radius: bx.r,
        eps_pairs,
        m_values,
        fitted_exponent,
        fit_residual,
        tail_estimate,
        classification,
    })
}
