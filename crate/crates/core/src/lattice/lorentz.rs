//! Lorentz quasi-norms with respect to counting measure, evaluated exactly
//! from the jumps of the distribution function.

use crate::error::{Error, Result};
use crate::lattice::lattice_box::LatticeBox;
use crate::lattice::potential::Potential;

/// `||u||_{l^{p,r}}` of a finitely supported function given by its values.
pub fn lorentz_norm(values: &[f64], p: f64, r: f64) -> Result<f64> {
    lorentz_norm_counted(values.iter().map(|&v| (v, 1u64)), p, r)
}

/// Same as [`lorentz_norm`] for magnitudes with multiplicities.
pub fn lorentz_norm_counted(
    values: impl IntoIterator<Item = (f64, u64)>,
    p: f64,
    r: f64,
) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("Lorentz exponent p = {p} must be in [1, inf)")));
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidInput(format!("Lorentz exponent r = {r} must be in [1, inf]")));
    }
    let mut mags: Vec<(f64, u64)> = Vec::new();
    for (v, c) in values {
        if !v.is_finite() {
            return Err(Error::NotComputable(format!("non-finite value {v}")));
        }
        if v != 0.0 && c > 0 {
            mags.push((v.abs(), c));
        }
    }
    if mags.is_empty() {
        return Ok(0.0);
    }
    mags.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    // Merge equal magnitudes so each jump appears once.
    let mut levels: Vec<(f64, f64)> = Vec::with_capacity(mags.len());
    let mut cum = 0.0f64;
    let mut i = 0;
    while i < mags.len() {
        let a = mags[i].0;
        while i < mags.len() && mags[i].0 == a {
            cum += mags[i].1 as f64;
            i += 1;
        }
        levels.push((a, cum));
    }
    if r.is_infinite() {
        return Ok(levels
            .iter()
            .map(|&(a, k)| a * k.powf(1.0 / p))
            .fold(0.0, f64::max));
    }
    let mut sum = 0.0;
    for (j, &(a, k)) in levels.iter().enumerate() {
        let next = levels.get(j + 1).map_or(0.0, |l| l.0);
        sum += k.powf(r / p) * (a.powf(r) - next.powf(r));
    }
    Ok((p / r * sum).powf(1.0 / r))
}

/// Lorentz norm of a potential restricted to growing boxes.
///
/// Returns the value on the largest box; errors when doubling the radius
/// still moves the value by more than `rel_tol`.
pub fn lorentz_norm_potential(
    v: &Potential,
    d: usize,
    p: f64,
    r: f64,
    radius: usize,
    rel_tol: f64,
) -> Result<f64> {
    let small = lorentz_norm(&v.sample(&LatticeBox::new(d, radius)), p, r)?;
    let large = lorentz_norm(&v.sample(&LatticeBox::new(d, 2 * radius)), p, r)?;
    if (large - small).abs() > rel_tol * large.max(f64::MIN_POSITIVE) {
        return Err(Error::NotComputable(format!(
            "l^({p},{r}) norm still growing: {small} on R={radius}, {large} on R={}",
            2 * radius
        )));
    }
    Ok(large)
}
