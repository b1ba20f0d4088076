//! Bound-state energies from the Birman–Schwinger principle: `E < 0` is an
//! eigenvalue of `H0 + lambda V` (`V <= 0`) iff `1` is an eigenvalue of
//! `lambda |V|^{1/2} (H0 - E)^{-1} |V|^{1/2}`.

use crate::error::{Error, Result};
use crate::lattice::Potential;
use crate::resolvent::exact::green_exact;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Top eigenvalue of `|V|^{1/2} (H0 - e)^{-1} |V|^{1/2}` for `e < 0`.
pub fn bs_top_eigenvalue(support: &[(Vec<i64>, f64)], e: f64, tol: f64) -> f64 {
    let n = support.len();
    let z = Complex64::new(e, 0.0);
    let mut cache: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut g = |diff: Vec<i64>| -> f64 {
        let key: Vec<i64> = {
            let mut k: Vec<i64> = diff.iter().map(|c| c.abs()).collect();
            k.sort_unstable();
            k
        };
        if let Some((_, v)) = cache.iter().find(|(k, _)| *k == key) {
            return *v;
        }
        let v = green_exact(&key, z, tol).re;
        cache.push((key, v));
        v
    };
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let diff: Vec<i64> = support[i].0.iter().zip(&support[j].0).map(|(a, b)| a - b).collect();
            let v = g(diff) * (support[i].1.abs() * support[j].1.abs()).sqrt();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k.symmetric_eigenvalues().iter().copied().fold(f64::MIN, f64::max)
}

/// Lowest eigenvalue of `H0 + lambda V` below the spectrum, if any, to
/// absolute accuracy `tol`.
pub fn bound_state_energy(v: &Potential, lambda: f64, d: usize, tol: f64) -> Result<Option<f64>> {
    let support = v
        .support()
        .ok_or_else(|| Error::InvalidInput("bound-state root needs a finitely supported V".into()))?;
    if support.iter().any(|(_, val)| *val > 0.0) || lambda < 0.0 {
        return Err(Error::InvalidInput("bound-state root needs lambda V <= 0".into()));
    }
    if support.is_empty() || lambda == 0.0 {
        return Ok(None);
    }
    if support.iter().any(|(x, _)| x.len() != d) {
        return Err(Error::InvalidInput(format!("support sites must lie in Z^{d}")));
    }
    let qtol = 1e-13;
    let f = |e: f64| lambda * bs_top_eigenvalue(&support, e, qtol) - 1.0;
    // Monotone increasing in e on (-inf, 0).
    let mut hi = -1e-12;
    if f(hi) < 0.0 {
        return Ok(None);
    }
    let mut lo = -1.0;
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::NoConvergence {
                iterations: 0,
                last: [lo, hi],
            });
        }
    }
    let mut it = 0;
    while hi - lo > tol && it < 200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        it += 1;
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_delta() {
        let e = bound_state_energy(&Potential::point_mass(vec![0], -1.0), 1.0, 1, 1e-13)
            .unwrap()
            .unwrap();
        assert!((e - (2.0 - 5f64.sqrt())).abs() < 1e-11);
    }

    #[test]
    fn three_dimensional_weak_delta_has_no_bound_state() {
        let r = bound_state_energy(&Potential::point_mass(vec![0, 0, 0], -3.0), 1.0, 3, 1e-8).unwrap();
        assert_eq!(r, None);
    }
}
