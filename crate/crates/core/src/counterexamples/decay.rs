//! Blow-up of `<x>^{-alpha} (H0 + eps^2)^{-1} <x>^{-alpha}` as `eps -> 0`
//! for `alpha < 1`, against the continuum scaling exponent `2 - 2 alpha`.

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::lattice::{ComplexEnergy, LatticeBox};
use crate::resolvent::{weighted_resolvent_norm, WeightedNormConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBlowup {
    pub d: usize,
    pub alpha: f64,
    pub radius: usize,
    pub eps: Vec<f64>,
    pub norms: Vec<f64>,
    /// Slope of `ln norm` against `ln eps`.
    pub slope: f64,
    /// `2 - 2 alpha`; the slope should approach its negative.
    pub scaling_exponent: f64,
}

pub fn decay_blowup(d: usize, alpha: f64, eps: &[f64], radius: usize, cfg: &WeightedNormConfig) -> Result<DecayBlowup> {
    if eps.len() < 2 || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("need at least two positive eps values".into()));
    }
    let bx = LatticeBox::new(d, radius);
    let norms: Vec<f64> = eps
        .iter()
        .map(|&e| weighted_resolvent_norm(alpha, alpha, ComplexEnergy::new(-e * e, 0.0), &bx, cfg).map(|n| n.norm))
        .collect::<Result<_>>()?;
    Ok(DecayBlowup {
        d,
        alpha,
        radius,
        eps: eps.to_vec(),
        slope: loglog_fit(eps, &norms).slope,
        norms,
        scaling_exponent: 2.0 - 2.0 * alpha,
    })
}
