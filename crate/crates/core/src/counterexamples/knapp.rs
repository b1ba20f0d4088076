//! Knapp-type family concentrating near `xi_j = 1/4` on `{h0 = 2d}`.
//!
//! With `F_eps(xi) = chi(sum_j (xi_j - 1/4) / (a eps^3)) prod_{j<d} chi((xi_j - 1/4) / eps)`
//! the quadratic form is `Q(eps) = int_{h0 = 2d} |F_eps|^2 d sigma / |grad h0|`
//! and, for `phi_eps = a eps^{d+2} w_p^{-1} (...)`, the squared norm
//! factorizes after `y_j = x_j - x_d`:
//! `M(eps) = a^2 eps^{2(d+2)} S(a eps^3) S(eps)^{d-1}` with
//! `S(c) = sum_t <t>^{2/p} |chi_check(c t)|^2`.

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::lattice::japanese;
use crate::resolvent::SurfaceSlice;
use crate::special::BumpProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EPS: [f64; 5] = [0.2, 0.14, 0.1, 0.07, 0.05];
pub const DEFAULT_MESH: usize = 128;
/// Factor by which the automatic aperture exceeds the measured minimum.
pub const APERTURE_SAFETY: f64 = 1.25;
/// `chi_check` below this fraction of `chi_check(0)` is treated as zero.
const TRANSFORM_TOL: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappConfig {
    pub d: usize,
    pub p: f64,
    /// Aperture constant; selected automatically when absent.
    pub a: Option<f64>,
    pub eps: Vec<f64>,
    /// Surface mesh points per free axis.
    pub mesh: usize,
}

impl Default for KnappConfig {
    fn default() -> Self {
        Self {
            d: 3,
            p: 6.0,
            a: None,
            eps: DEFAULT_EPS.to_vec(),
            mesh: DEFAULT_MESH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappDatum {
    pub eps: f64,
    pub q: f64,
    pub q_error: f64,
    pub m: f64,
    /// `max |sum_j (xi_j - 1/4)| / eps^3` over surface nodes in the tube.
    pub tube_sum: f64,
    pub tube_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappReport {
    pub d: usize,
    pub p: f64,
    pub a: f64,
    pub a_auto: bool,
    pub mesh: usize,
    pub data: Vec<KnappDatum>,
    pub slope_q: f64,
    pub slope_m: f64,
    /// Fitted slope of `Q / M`.
    pub slope_ratio: f64,
    /// `d - 1`.
    pub predicted_q: f64,
    /// `(d + 2)(1 - 2/p)`.
    pub predicted_m: f64,
    /// True when `Q / M` grows as `eps` decreases.
    pub ratio_unbounded: bool,
    /// `p > 2(d + 2)/3`.
    pub predicted_unbounded: bool,
    pub tube_inclusion: bool,
}

fn slice(d: usize, eps: f64) -> Result<SurfaceSlice> {
    let mut hw = vec![eps / 4.0; d];
    // The last coordinate is pinned only through the surface equation.
    hw[d - 1] = 1.25 * (d - 1) as f64 * eps / 4.0;
    SurfaceSlice::new(2.0 * d as f64, vec![0.25; d], hw)
}

fn tangential(xi: &[f64], eps: f64) -> f64 {
    let d = xi.len();
    xi[..d - 1].iter().map(|&x| BumpProfile::eval((x - 0.25) / eps)).product()
}

fn tube_sum(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x - 0.25).sum()
}

/// `max |sum_j (xi_j - 1/4)|` over mesh nodes where the tangential cutoff
/// is nonzero.
fn max_tube_sum(d: usize, eps: f64, mesh: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for n in [mesh, (mesh / 2).max(1)] {
        let q = slice(d, eps)?.nodes(n)?;
        for pt in &q.points {
            if tangential(pt, eps) > 0.0 {
                best = best.max(tube_sum(pt).abs());
            }
        }
    }
    Ok(best)
}

/// `S(c) = sum_t <t>^{2/p} |chi_check(c t)|^2`.
fn weighted_transform_sum(c: f64, p: f64, bump: &BumpProfile) -> f64 {
    let cut = bump.effective_cutoff(TRANSFORM_TOL);
    let tmax = (cut / c).ceil() as i64;
    let tail: f64 = (1..=tmax)
        .rev()
        .map(|t| {
            let g = bump.transform(c * t as f64);
            japanese(t as f64).powf(2.0 / p) * g * g
        })
        .sum();
    let g0 = bump.transform(0.0);
    g0 * g0 + 2.0 * tail
}

pub fn knapp_family(cfg: &KnappConfig) -> Result<KnappReport> {
    let (d, p) = (cfg.d, cfg.p);
    if d < 3 {
        return Err(Error::InvalidInput(format!("the Knapp family needs d >= 3, got {d}")));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidInput(format!("weight exponent p = {p} must be positive")));
    }
    if cfg.eps.len() < 2 || cfg.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::InvalidInput("need at least two eps values in (0, 1]".into()));
    }
    let sums: Vec<f64> = cfg
        .eps
        .par_iter()
        .map(|&e| max_tube_sum(d, e, cfg.mesh).map(|s| s / e.powi(3)))
        .collect::<Result<_>>()?;
    let needed = 4.0 * sums.iter().cloned().fold(0.0, f64::max);
    let (a, a_auto) = match cfg.a {
        Some(a) => (a, false),
        None => (APERTURE_SAFETY * needed, true),
    };
    if !(a > 0.0) {
        return Err(Error::Aperture(format!("a = {a} must be positive")));
    }
    for (&e, &s) in cfg.eps.iter().zip(&sums) {
        if s >= a / 4.0 {
            return Err(Error::Aperture(format!(
                "at eps = {e} the surface reaches |sum (xi_j - 1/4)| = {:.4e} but the tube has half-width a eps^3 / 4 = {:.4e}; need a > {needed:.4}",
                s * e.powi(3),
                a * e.powi(3) / 4.0
            )));
        }
    }
    let bump = BumpProfile::shared();
    let data: Vec<KnappDatum> = cfg
        .eps
        .par_iter()
        .zip(&sums)
        .map(|(&e, &s)| {
            let ae3 = a * e.powi(3);
            let f = |xi: &[f64]| -> f64 {
                let v = tangential(xi, e) * BumpProfile::eval(tube_sum(xi) / ae3);
                v * v
            };
            let (q, q_error) = slice(d, e)?.integrate(f, cfg.mesh)?;
            let m = a * a
                * e.powi(2 * (d as i32 + 2))
                * weighted_transform_sum(ae3, p, bump)
                * weighted_transform_sum(e, p, bump).powi(d as i32 - 1);
            Ok(KnappDatum {
                eps: e,
                q,
                q_error,
                m,
                tube_sum: s,
                tube_ok: s < a / 4.0,
            })
        })
        .collect::<Result<_>>()?;
    let eps: Vec<f64> = data.iter().map(|x| x.eps).collect();
    let qs: Vec<f64> = data.iter().map(|x| x.q).collect();
    let ms: Vec<f64> = data.iter().map(|x| x.m).collect();
    let ratios: Vec<f64> = data.iter().map(|x| x.q / x.m).collect();
    let slope_q = loglog_fit(&eps, &qs).slope;
    let slope_m = loglog_fit(&eps, &ms).slope;
    let slope_ratio = loglog_fit(&eps, &ratios).slope;
    Ok(KnappReport {
        d,
        p,
        a,
        a_auto,
        mesh: cfg.mesh,
        tube_inclusion: data.iter().all(|x| x.tube_ok),
        data,
        slope_q,
        slope_m,
        slope_ratio,
        predicted_q: (d - 1) as f64,
        predicted_m: (d + 2) as f64 * (1.0 - 2.0 / p),
        ratio_unbounded: slope_ratio < 0.0,
        predicted_unbounded: p > 2.0 * (d + 2) as f64 / 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_aperture_is_rejected() {
        let cfg = KnappConfig {
            a: Some(0.01),
            eps: vec![0.2, 0.1],
            mesh: 32,
            ..Default::default()
        };
        assert!(matches!(knapp_family(&cfg), Err(Error::Aperture(_))));
    }

    #[test]
    fn transform_sum_matches_integral_scaling() {
        let bump = BumpProfile::shared();
        // For small c the sum approaches c^{-1-2/p} int |k|^{2/p} |chi_check(k)|^2 dk.
        let p = 6.0;
        let a = weighted_transform_sum(0.01, p, bump) * 0.01f64.powf(1.0 + 2.0 / p);
        let b = weighted_transform_sum(0.005, p, bump) * 0.005f64.powf(1.0 + 2.0 / p);
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn low_dimension_rejected() {
        let cfg = KnappConfig { d: 2, ..Default::default() };
        assert!(matches!(knapp_family(&cfg), Err(Error::InvalidInput(_))));
    }
}
