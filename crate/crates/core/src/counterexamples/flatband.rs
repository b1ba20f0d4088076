//! The flat piece `xi_1 + xi_2 = 1/2` of `{h0 = 4}` on `T^2`.

use crate::error::{Error, Result};
use crate::fit::{line_fit, loglog_fit};
use crate::lattice::japanese;
use crate::special::BumpProfile;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_RHO: f64 = 0.24;
/// Exponent applied to the product bump.
pub const DEFAULT_POWER: i32 = 4;
/// Midpoint nodes on the support interval.
pub const LINE_NODES: usize = 4096;

/// `chi(xi) = [B((xi_1 - 1/4)/(4 rho)) B((xi_2 - 1/4)/(4 rho))]^power`,
/// supported in the square of half-width `rho` about `(1/4, 1/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatCutoff {
    pub rho: f64,
    pub power: i32,
}

impl FlatCutoff {
    pub fn new(rho: f64) -> Result<Self> {
        Self::with_power(rho, DEFAULT_POWER)
    }

    pub fn with_power(rho: f64, power: i32) -> Result<Self> {
        if power < 1 {
            return Err(Error::InvalidInput(format!("cutoff power {power} must be >= 1")));
        }
        if !(rho > 0.0 && rho < 0.25) {
            return Err(Error::CutoffViolation(format!(
                "support radius {rho} must lie in (0, 1/4): the line weight 1/(4 pi sin 2 pi xi_1) is singular at xi_1 in {{0, 1/2}}"
            )));
        }
        Ok(Self { rho, power })
    }

    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        let s = 4.0 * self.rho;
        (BumpProfile::eval((xi1 - 0.25) / s) * BumpProfile::eval((xi2 - 0.25) / s)).powi(self.power)
    }

    /// Midpoint nodes `xi_1` and weights `chi(xi_1, 1/2 - xi_1) / (4 pi sin 2 pi xi_1)`.
    fn line(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = (0.25 - self.rho, 0.25 + self.rho);
        let h = (hi - lo) / LINE_NODES as f64;
        (0..LINE_NODES)
            .map(|i| {
                let x = lo + (i as f64 + 0.5) * h;
                (x, h * self.eval(x, 0.5 - x) / (4.0 * PI * (2.0 * PI * x).sin()))
            })
            .unzip()
    }
}

/// `J(t) = int e^{2 pi i t xi_1} chi(xi_1, 1/2 - xi_1) d xi_1 / (4 pi sin 2 pi xi_1)`.
pub fn flat_j(cut: &FlatCutoff, t: i64) -> Complex64 {
    let (xs, ws) = cut.line();
    xs.iter()
        .zip(&ws)
        .map(|(&x, &w)| Complex64::from_polar(w, 2.0 * PI * t as f64 * x))
        .sum()
}

/// `I(x_1, x_2)` with the full phase `x_1 xi_1 + x_2 (1/2 - xi_1)`.
pub fn flat_i(cut: &FlatCutoff, x1: i64, x2: i64) -> Complex64 {
    let (xs, ws) = cut.line();
    xs.iter()
        .zip(&ws)
        .map(|(&x, &w)| {
            let ph = 2.0 * PI * (x1 as f64 * x + x2 as f64 * (0.5 - x));
            Complex64::from_polar(w, ph)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatbandEntry {
    pub x1: i64,
    pub x2: i64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatbandTable {
    pub rho: f64,
    pub range: i64,
    pub entries: Vec<FlatbandEntry>,
    /// `max | |I(x_1, x_2)| - |J(x_1 - x_2)| |`.
    pub factorization_error: f64,
    /// `|J(t)|` for `t = 0..=2 range`.
    pub j_abs: Vec<f64>,
    /// `|I_1(s, 0)|` for even `s` in `[-range, range]`.
    pub diagonal: Vec<(i64, f64)>,
    pub diagonal_mean: f64,
    pub diagonal_std: f64,
}

/// `I` on `[-range, range]^2`.
pub fn flatband_kernel(rho: f64, range: i64) -> Result<FlatbandTable> {
    if range < 0 {
        return Err(Error::InvalidInput("range must be nonnegative".into()));
    }
    let cut = FlatCutoff::new(rho)?;
    let (xs, ws) = cut.line();
    let j_abs: Vec<f64> = (0..=2 * range).map(|t| flat_j(&cut, t).norm()).collect();
    let mut entries = Vec::new();
    let mut err: f64 = 0.0;
    // Line phases factor as e^{2 pi i x_1 xi} e^{2 pi i x_2 (1/2 - xi)}.
    let side = (2 * range + 1) as usize;
    let phase = |x: i64, f: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
        xs.iter().map(|&xi| Complex64::from_polar(1.0, 2.0 * PI * x as f64 * f(xi))).collect()
    };
    let a: Vec<Vec<Complex64>> = (-range..=range).map(|x| phase(x, &|xi| xi)).collect();
    let b: Vec<Vec<Complex64>> = (-range..=range).map(|x| phase(x, &|xi| 0.5 - xi)).collect();
    for i in 0..side {
        for j in 0..side {
            let v: Complex64 = (0..xs.len()).map(|k| a[i][k] * b[j][k] * ws[k]).sum();
            let (x1, x2) = (i as i64 - range, j as i64 - range);
            err = err.max((v.norm() - j_abs[(x1 - x2).unsigned_abs() as usize]).abs());
            entries.push(FlatbandEntry {
                x1,
                x2,
                re: v.re,
                im: v.im,
                abs: v.norm(),
            });
        }
    }
    let diagonal: Vec<(i64, f64)> = (-range..=range)
        .filter(|s| s % 2 == 0)
        .map(|s| (s, flat_i(&cut, s / 2, s / 2).norm()))
        .collect();
    let n = diagonal.len() as f64;
    let mean = diagonal.iter().map(|x| x.1).sum::<f64>() / n;
    let std = (diagonal.iter().map(|x| (x.1 - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(FlatbandTable {
        rho,
        range,
        entries,
        factorization_error: err,
        j_abs,
        diagonal,
        diagonal_mean: mean,
        diagonal_std: std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupConfig {
    pub rho: f64,
    /// Largest `|x_1 + x_2|` sampled.
    pub s_max: i64,
    /// Largest `|x_1 - x_2|` sampled.
    pub t_max: i64,
    /// Smallest `s` used in the profile fit.
    pub s_fit_min: i64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            s_max: 4096,
            t_max: 40,
            s_fit_min: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub rho: f64,
    /// `(s, |v(s, 0)|)` along `x_1 = x_2` with `v = w K w u`.
    pub profile: Vec<(i64, f64)>,
    /// Slope of `ln |v(s, 0)|` against `ln <s>`.
    pub profile_slope: f64,
    /// `(S, sum_{|s| <= S, |t| <= t_max} |v|^2)`.
    pub partial_sums: Vec<(i64, f64)>,
    /// Slope of the partial sums against `ln S`.
    pub log_slope: f64,
    pub psi_mass: f64,
}

/// Growth of `w chi(D) delta(H0 - 4) w u` for
/// `u = e^{pi i (x_1 + x_2)/2} w^{-1} psi`.
pub fn flatband_weighted_blowup(psi: &[(Vec<i64>, f64)], cfg: &BlowupConfig) -> Result<BlowupReport> {
    if psi.iter().any(|(x, _)| x.len() != 2) {
        return Err(Error::InvalidInput("psi must live on Z^2".into()));
    }
    if psi.iter().any(|(_, v)| *v < 0.0) {
        return Err(Error::InvalidInput("psi must be nonnegative (its sum must be positive)".into()));
    }
    let mass: f64 = psi.iter().map(|(_, v)| v).sum();
    if !(mass > 0.0) {
        return Err(Error::InvalidInput("psi must have positive sum".into()));
    }
    if cfg.s_max < 4 || cfg.t_max < 0 || cfg.s_fit_min < 1 || cfg.s_fit_min >= cfg.s_max {
        return Err(Error::InvalidInput("need 1 <= s_fit_min < s_max and t_max >= 0".into()));
    }
    let cut = FlatCutoff::new(cfg.rho)?;
    let reach = psi.iter().map(|(x, _)| (x[0] - x[1]).abs()).max().unwrap_or(0);
    let jmax = cfg.t_max + reach;
    let j: Vec<Complex64> = (-jmax..=jmax).map(|t| flat_j(&cut, t)).collect();
    // (w u)(y) = e^{pi i (y_1 + y_2)/2} psi(y); K(x) = e^{pi i x_2} J(x_1 - x_2).
    let src: Vec<(i64, i64, Complex64)> = psi
        .iter()
        .map(|(y, v)| (y[0], y[1], Complex64::from_polar(*v, PI * (y[0] + y[1]) as f64 / 2.0)))
        .collect();
    let v_at = |s: i64, t: i64| -> f64 {
        let (x1, x2) = ((s + t) / 2, (s - t) / 2);
        let k: Complex64 = src
            .iter()
            .map(|&(y1, y2, f)| {
                let dt = (x1 - y1) - (x2 - y2);
                Complex64::from_polar(1.0, PI * (x2 - y2) as f64) * j[(dt + jmax) as usize] * f
            })
            .sum();
        japanese(s as f64).powf(-0.5) / japanese(t as f64) * k.norm()
    };
    let profile: Vec<(i64, f64)> = (0..=cfg.s_max).step_by(2).map(|s| (s, v_at(s, 0))).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = profile
        .iter()
        .filter(|(s, _)| *s >= cfg.s_fit_min)
        .map(|&(s, v)| (japanese(s as f64), v))
        .unzip();
    let profile_slope = loglog_fit(&lx, &ly).slope;
    let shell = |s: i64| -> f64 {
        (-cfg.t_max..=cfg.t_max)
            .filter(|t| (s - t).rem_euclid(2) == 0)
            .map(|t| v_at(s, t).powi(2))
            .sum()
    };
    let mut partial_sums = Vec::new();
    let mut acc = shell(0);
    let mut next = 1i64;
    for s in 1..=cfg.s_max {
        acc += shell(s) + shell(-s);
        if s == next {
            partial_sums.push((s, acc));
            next *= 2;
        }
    }
    let (px, py): (Vec<f64>, Vec<f64>) = partial_sums
        .iter()
        .filter(|(s, _)| *s >= cfg.s_fit_min)
        .map(|&(s, v)| ((s as f64).ln(), v))
        .unzip();
    let log_slope = if px.len() >= 2 { line_fit(&px, &py).slope } else { f64::NAN };
    Ok(BlowupReport {
        rho: cfg.rho,
        profile,
        profile_slope,
        partial_sums,
        log_slope,
        psi_mass: mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_touching_the_singular_line_is_rejected() {
        assert!(matches!(FlatCutoff::new(0.25), Err(Error::CutoffViolation(_))));
        assert!(matches!(flatband_kernel(0.3, 2), Err(Error::CutoffViolation(_))));
    }

    #[test]
    fn factorization_is_exact() {
        let t = flatband_kernel(DEFAULT_RHO, 6).unwrap();
        assert!(t.factorization_error < 1e-12);
        assert!(t.diagonal_std < 1e-10 * t.diagonal_mean);
        assert!(t.j_abs[0] > 0.0);
    }

    #[test]
    fn signed_or_empty_psi_is_rejected() {
        let cfg = BlowupConfig::default();
        assert!(flatband_weighted_blowup(&[(vec![0, 0], 1.0), (vec![1, 0], -0.5)], &cfg).is_err());
        assert!(flatband_weighted_blowup(&[], &cfg).is_err());
    }

    #[test]
    fn report_is_linear_in_psi() {
        let cfg = BlowupConfig {
            s_max: 64,
            t_max: 10,
            ..Default::default()
        };
        let a = flatband_weighted_blowup(&[(vec![0, 0], 1.0), (vec![2, 1], 0.5)], &cfg).unwrap();
        let b = flatband_weighted_blowup(&[(vec![0, 0], 3.0), (vec![2, 1], 1.5)], &cfg).unwrap();
        for (x, y) in a.profile.iter().zip(&b.profile) {
            assert!((3.0 * x.1 - y.1).abs() <= 1e-12 * y.1.max(1e-300));
        }
    }
}
