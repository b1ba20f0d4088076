//! The ultrahyperbolic propagator `e^{-it Delta_x} e^{it Delta_y}` on
//! `R^k x R^(d-k)` applied to a unit-mass Gaussian.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Grid half-width in standard deviations of the evolved packet.
const WIDTH_SDS: f64 = 8.0;
/// Spectral resolution: `dx <= pi sigma / NYQUIST_SDS`.
const NYQUIST_SDS: f64 = 8.0;
const MAX_POINTS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumConfig {
    pub sigma: f64,
    /// Points per axis; chosen automatically when absent.
    pub points: Option<usize>,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        Self { sigma: 2.0, points: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumPoint {
    pub d: usize,
    pub k: usize,
    pub t: f64,
    pub sigma: f64,
    pub points: usize,
    pub spacing: f64,
    pub sup_norm: f64,
    /// `(4 pi |t|)^{-d/2}`.
    pub envelope: f64,
}

/// Sup-norm of one evolved factor, `(2 pi)^{-1/2} (sigma^4 + 4 t^2)^{-1/4}`.
pub fn gaussian_factor_sup(sigma: f64, t: f64) -> f64 {
    (2.0 * PI).powf(-0.5) * (sigma.powi(4) + 4.0 * t * t).powf(-0.25)
}

/// `(period, points)` resolving the packet at time `t`.
pub fn required_grid(sigma: f64, t: f64) -> (f64, usize) {
    let sd = (sigma.powi(4) + 4.0 * t * t).sqrt() / sigma;
    let period = 2.0 * WIDTH_SDS * sd;
    let dx = PI * sigma / NYQUIST_SDS;
    (period, ((period / dx).ceil() as usize).next_power_of_two())
}

/// `max_x |e^{i s t d^2/dx^2} g(x)|` for the unit-mass Gaussian `g`.
fn factor_sup(sigma: f64, t: f64, sign: f64, period: f64, n: usize) -> f64 {
    let dx = period / n as f64;
    let norm = (2.0 * PI * sigma * sigma).powf(-0.5);
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| {
            let x = (i as f64 - (n / 2) as f64) * dx;
            Complex64::new(norm * (-x * x / (2.0 * sigma * sigma)).exp(), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut v);
    for (m, c) in v.iter_mut().enumerate() {
        let f = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let kf = 2.0 * PI * f / period;
        // Delta has symbol -k^2, so e^{-i s t Delta} multiplies by e^{i s t k^2}.
        *c *= Complex64::from_polar(1.0 / n as f64, sign * t * kf * kf);
    }
    planner.plan_fft_inverse(n).process(&mut v);
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Sup-norm at time `t` of the propagator with `k` forward and `d - k`
/// backward axes; the axes factorize, so the result is a product.
pub fn continuum_dispersive(d: usize, k: usize, t: f64, cfg: &ContinuumConfig) -> Result<ContinuumPoint> {
    if d == 0 || k > d {
        return Err(Error::InvalidInput(format!("need d >= 1 and 0 <= k <= d, got d = {d}, k = {k}")));
    }
    if !(cfg.sigma > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput("sigma must be positive and t finite".into()));
    }
    let (period, need) = required_grid(cfg.sigma, t);
    let n = match cfg.points {
        Some(n) if n < need => {
            return Err(Error::ContinuumGrid(format!(
                "{n} points per axis cannot resolve the chirp at t = {t}; need at least {need}"
            )))
        }
        Some(n) => n,
        None => need,
    };
    if n > MAX_POINTS {
        return Err(Error::ContinuumGrid(format!("t = {t} needs {n} points per axis, above the cap {MAX_POINTS}")));
    }
    let forward = factor_sup(cfg.sigma, t, 1.0, period, n);
    let backward = if k < d { factor_sup(cfg.sigma, t, -1.0, period, n) } else { 0.0 };
    let sup_norm = forward.powi(k as i32) * backward.powi((d - k) as i32);
    Ok(ContinuumPoint {
        d,
        k,
        t,
        sigma: cfg.sigma,
        points: n,
        spacing: period / n as f64,
        sup_norm,
        envelope: (4.0 * PI * t.abs()).powf(-(d as f64) / 2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closed_form_and_envelope() {
        let cfg = ContinuumConfig::default();
        let p = continuum_dispersive(2, 1, 10.0, &cfg).unwrap();
        let exact = gaussian_factor_sup(2.0, 10.0).powi(2);
        assert!((p.sup_norm - exact).abs() < 1e-10 * exact);
        assert!((p.sup_norm / p.envelope - 1.0).abs() < 0.1);
    }

    #[test]
    fn time_reversal_and_index() {
        let cfg = ContinuumConfig::default();
        for k in 0..=3 {
            let a = continuum_dispersive(3, k, 7.0, &cfg).unwrap().sup_norm;
            let b = continuum_dispersive(3, k, -7.0, &cfg).unwrap().sup_norm;
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let cfg = ContinuumConfig { sigma: 2.0, points: Some(64) };
        assert!(matches!(continuum_dispersive(2, 1, 100.0, &cfg), Err(Error::ContinuumGrid(_))));
    }
}
