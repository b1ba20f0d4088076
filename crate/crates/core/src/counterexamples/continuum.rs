//! Continuum probes for `phi = chi |xi|^{-(d-2)/2}`: its Sobolev norms on
//! refining grids and the two-sheet surface form of the ultrahyperbolic
//! symbol `p(xi) = xi_1^2 - |xi'|^2`.

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::quad::integrate;
use crate::special::BumpProfile;
use rayon::prelude::*;
use rustdct::DctPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevConfig {
    pub d: usize,
    pub s: Vec<f64>,
    /// Full grid points per axis, one entry per refinement level.
    pub grids: Vec<usize>,
    /// Side of the periodic cube centred at the singularity.
    pub period: f64,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        Self {
            d: 3,
            s: vec![0.0, 0.5, 0.9, 1.0],
            grids: vec![256, 512],
            period: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevRow {
    pub grid: usize,
    pub s: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevTable {
    pub d: usize,
    pub period: f64,
    pub rows: Vec<SobolevRow>,
    /// `(s, norm(last grid) / norm(previous grid) - 1)`.
    pub drift: Vec<(f64, f64)>,
}

/// `chi(|x|) |x|^{-(d-2)/2}` with `chi = B(r / 4)`, supported in the unit ball.
pub fn singular_profile(d: usize, r: f64) -> f64 {
    BumpProfile::eval(r / 4.0) * r.powf(-(d as f64 - 2.0) / 2.0)
}

/// In-place unnormalized DCT-II along every axis of a cube of side `n`.
fn dct_cube(data: &mut [f64], d: usize, n: usize) {
    let plan = DctPlanner::new().plan_dct2(n);
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = n * stride;
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![0.0; n];
            let mut scratch = vec![0.0; plan.get_scratch_len()];
            for inner in 0..stride {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = chunk[i * stride + inner];
                }
                plan.process_dct2_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    chunk[i * stride + inner] = *v;
                }
            }
        });
    }
}

/// `sum_k (1 + 4 pi^2 |k/L|^2)^s |phi_hat(k)|^2 / L^d` for every `s`, from
/// the positive octant of a cell-centred grid with `m` points per axis.
fn sobolev_norms(d: usize, m: usize, period: f64, s_list: &[f64]) -> Vec<f64> {
    let n = m / 2;
    let h = period / m as f64;
    let total = n.pow(d as u32);
    let mut data: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rest = i;
            let mut r2 = 0.0;
            for _ in 0..d {
                let x = ((rest % n) as f64 + 0.5) * h;
                r2 += x * x;
                rest /= n;
            }
            singular_profile(d, r2.sqrt())
        })
        .collect();
    dct_cube(&mut data, d, n);
    let scale = (2.0 * h).powi(d as i32);
    let vol = period.powi(d as i32);
    s_list
        .iter()
        .map(|&s| {
            let sum: f64 = data
                .par_iter()
                .enumerate()
                .map(|(i, &c)| {
                    let mut rest = i;
                    let mut k2 = 0.0;
                    let mut mult = 1.0;
                    for _ in 0..d {
                        let k = rest % n;
                        if k > 0 {
                            mult *= 2.0;
                        }
                        k2 += (k * k) as f64;
                        rest /= n;
                    }
                    let w = (1.0 + 4.0 * PI * PI * k2 / (period * period)).powf(s);
                    mult * w * (scale * c).powi(2)
                })
                .sum();
            (sum / vol).sqrt()
        })
        .collect()
}

pub fn sobolev_blowup_probe(cfg: &SobolevConfig) -> Result<SobolevTable> {
    if cfg.d < 3 {
        return Err(Error::InvalidInput(format!("the probe needs d >= 3, got {}", cfg.d)));
    }
    if cfg.grids.is_empty() || cfg.grids.iter().any(|&m| m < 4 || m % 2 != 0) {
        return Err(Error::InvalidInput("grids must be even and at least 4".into()));
    }
    if cfg.s.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
        return Err(Error::InvalidInput("smoothness indices must lie in [0, 1]".into()));
    }
    if !(cfg.period > 2.0) {
        return Err(Error::InvalidInput("the period must exceed the support diameter 2".into()));
    }
    let mut rows = Vec::new();
    let mut per_grid = Vec::new();
    for &m in &cfg.grids {
        let norms = sobolev_norms(cfg.d, m, cfg.period, &cfg.s);
        for (&s, &norm) in cfg.s.iter().zip(&norms) {
            rows.push(SobolevRow { grid: m, s, norm });
        }
        per_grid.push(norms);
    }
    let drift = if per_grid.len() >= 2 {
        let (a, b) = (&per_grid[per_grid.len() - 2], &per_grid[per_grid.len() - 1]);
        cfg.s.iter().zip(a.iter().zip(b)).map(|(&s, (x, y))| (s, y / x - 1.0)).collect()
    } else {
        Vec::new()
    };
    Ok(SobolevTable {
        d: cfg.d,
        period: cfg.period,
        rows,
        drift,
    })
}

/// Radial cutoff in `|xi|` used by the surface form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UltraProfile {
    /// `B(rho / (4 R)) rho^{-(d-2)/2}`.
    Singular { radius: f64 },
    /// `B((rho - c) / (4 w))` on the annulus `inner < rho < outer`.
    Bounded { inner: f64, outer: f64 },
    Zero,
}

impl UltraProfile {
    fn sq(&self, d: usize, rho: f64) -> f64 {
        match *self {
            UltraProfile::Singular { radius } => BumpProfile::eval(rho / (4.0 * radius)).powi(2) * rho.powf(-(d as f64 - 2.0)),
            UltraProfile::Bounded { inner, outer } => {
                let (c, w) = ((inner + outer) / 2.0, (outer - inner) / 2.0);
                BumpProfile::eval((rho - c) / (4.0 * w)).powi(2)
            }
            UltraProfile::Zero => 0.0,
        }
    }

    fn outer(&self) -> f64 {
        match *self {
            UltraProfile::Singular { radius } => radius,
            UltraProfile::Bounded { outer, .. } => outer,
            UltraProfile::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltraSeries {
    pub d: usize,
    pub profile: UltraProfile,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of the values against `ln(1/eps)`.
    pub log_slope: f64,
}

/// `|S^{n-1}|`.
fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma_half(n)
}

/// `Gamma(n / 2)`.
fn gamma_half(n: usize) -> f64 {
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// `sum_pm int |phi|^2 d xi' / (2 sqrt(|xi'|^2 + eps))` on `p = -eps`, as
/// `2 |S^{d-2}| int r^{d-2} |phi(rho)|^2 / (2 sqrt(r^2 + eps)) dr` with
/// `rho = sqrt(2 r^2 + eps)`.
pub fn ultra_surface_value(d: usize, profile: &UltraProfile, eps: f64) -> f64 {
    let rmax = profile.outer();
    if rmax <= 0.0 {
        return 0.0;
    }
    let area = sphere_area(d - 1);
    let f = |r: f64| -> f64 {
        let rho = (2.0 * r * r + eps).sqrt();
        r.powi(d as i32 - 2) * profile.sq(d, rho) / (2.0 * (r * r + eps).sqrt())
    };
    // Geometric panels resolve the sqrt(eps) scale.
    let mut edges = vec![0.0];
    let mut b = eps.sqrt().min(rmax);
    while b < rmax {
        edges.push(b);
        b *= 4.0;
    }
    edges.push(rmax);
    let total: f64 = edges.windows(2).map(|w| integrate(&f, w[0], w[1], 1e-14, 1e-12)).sum();
    2.0 * area * total
}

pub fn ultra_surface_form(d: usize, profile: &UltraProfile, eps: &[f64]) -> Result<UltraSeries> {
    if d < 3 {
        return Err(Error::InvalidInput(format!("the surface form needs d >= 3, got {d}")));
    }
    if eps.len() < 2 || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("need at least two positive eps values".into()));
    }
    if let UltraProfile::Bounded { inner, outer } = profile {
        if !(*inner > 0.0 && outer > inner) {
            return Err(Error::InvalidInput("annulus needs 0 < inner < outer".into()));
        }
    }
    let values: Vec<f64> = eps.par_iter().map(|&e| ultra_surface_value(d, profile, e)).collect();
    let lx: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let log_slope = line_fit(&lx, &values).slope;
    Ok(UltraSeries {
        d,
        profile: profile.clone(),
        eps: eps.to_vec(),
        values,
        log_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_convention() {
        let n = 8;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        let mut y = x.clone();
        dct_cube(&mut y, 1, n);
        for (k, yk) in y.iter().enumerate() {
            let want: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos())
                .sum();
            assert!((yk - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn zero_order_norm_is_l2() {
        // s = 0 is Parseval; compare with the radial integral of |phi|^2.
        let cfg = SobolevConfig {
            s: vec![0.0],
            grids: vec![64],
            ..Default::default()
        };
        let t = sobolev_blowup_probe(&cfg).unwrap();
        let h = cfg.period / 64.0;
        let n = 32;
        let mut direct = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = (((i as f64 + 0.5) * h).powi(2) + ((j as f64 + 0.5) * h).powi(2) + ((k as f64 + 0.5) * h).powi(2)).sqrt();
                    direct += singular_profile(3, r).powi(2);
                }
            }
        }
        let direct = (8.0 * direct * h.powi(3)).sqrt();
        assert!((t.rows[0].norm - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn zero_profile_and_dimension() {
        let s = ultra_surface_form(3, &UltraProfile::Zero, &[0.1, 0.01]).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert!(ultra_surface_form(2, &UltraProfile::Zero, &[0.1, 0.01]).is_err());
    }
}
