//! Space-time norms `(int_{-T}^{T} ||e^{-itH0} u0||^2_{l^{p,2}} dt)^{1/2}`
//! with `p = 2d/(d-3)`.

use crate::dynamics::propagator::{revival_horizon, required_radius, SpectralData};
use crate::error::{Error, Result};
use crate::lattice::{lorentz_norm, lorentz_norm_counted, LatticeBox, LatticeFn};
use crate::special::bessel_j_all;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Uniform step on `[0, 1]`.
pub const FINE_STEP: f64 = 1.0 / 512.0;
/// Geometric growth of the step after `t = 1`.
pub const STEP_GROWTH: f64 = 1.05;
pub const MAX_STEP: f64 = 0.25;
/// Product magnitudes below this fraction of the largest one are dropped.
pub const PRUNE_REL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrichartzMethod {
    PeriodicBox,
    BesselProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub d: usize,
    pub p: f64,
    pub r: f64,
    pub t_max: f64,
    pub value: f64,
    pub method: StrichartzMethod,
    /// `(t, ||u(t)||_{l^{p,2}})` on `[0, T]`.
    pub samples: Vec<(f64, f64)>,
}

/// `2d / (d - 3)`.
pub fn strichartz_exponent(d: usize) -> Result<f64> {
    if d < 4 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(2.0 * d as f64 / (d as f64 - 3.0))
}

/// Nodes on `[0, t_max]`: step [`FINE_STEP`] up to 1, then growing by
/// [`STEP_GROWTH`] up to [`MAX_STEP`].
pub fn time_grid(t_max: f64) -> Vec<f64> {
    let mut ts = vec![0.0];
    let mut k = 0u32;
    let mut h = FINE_STEP;
    loop {
        let t = if ts.last().unwrap() + h / 2.0 < 1.0 {
            k += 1;
            k as f64 * FINE_STEP
        } else {
            h = (h * STEP_GROWTH).min(MAX_STEP);
            ts.last().unwrap() + h
        };
        if t >= t_max - 1e-12 {
            ts.push(t_max);
            return ts;
        }
        ts.push(t);
    }
}

fn trapezoid_sq(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 * w[0].1 + w[1].1 * w[1].1))
        .sum()
}

/// Generic version on the periodic box carrying `u0`; `T` must lie within
/// the revival horizon.
pub fn strichartz_norm(u0: &LatticeFn, t_max: f64) -> Result<StrichartzReport> {
    let d = u0.bx.d;
    let p = strichartz_exponent(d)?;
    let horizon = revival_horizon(&u0.bx);
    if t_max > horizon {
        return Err(Error::RevivalHorizon {
            t: t_max,
            horizon,
            required_radius: required_radius(t_max),
        });
    }
    let real = u0.values.iter().all(|v| v.im == 0.0);
    let spec = SpectralData::new(u0);
    let grid = time_grid(t_max);
    let norm_at = |t: f64| -> Result<f64> {
        let u = spec.evolve_unchecked(t);
        let mags: Vec<f64> = u.values.iter().map(|v| v.norm()).collect();
        lorentz_norm(&mags, p, 2.0)
    };
    let forward: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| norm_at(t).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    let mut total = trapezoid_sq(&forward);
    if real {
        total *= 2.0;
    } else {
        let backward: Vec<(f64, f64)> = grid
            .par_iter()
            .map(|&t| norm_at(-t).map(|v| (t, v)))
            .collect::<Result<_>>()?;
        total += trapezoid_sq(&backward);
    }
    Ok(StrichartzReport {
        d,
        p,
        r: 2.0,
        t_max,
        value: total.sqrt(),
        method: StrichartzMethod::PeriodicBox,
        samples: forward,
    })
}

/// Magnitudes of `e^{-itH0} delta_0` on `Z^d` with their multiplicities.
///
/// `|u(t, x)| = prod_j |J_{x_j}(2t)|`; tuples are enumerated up to
/// permutation and sign.
pub fn delta_magnitudes(d: usize, t: f64) -> Vec<(f64, u64)> {
    let x = 2.0 * t.abs();
    let nmax = (x + 10.0 * x.cbrt() + 20.0).ceil() as usize;
    let a: Vec<f64> = bessel_j_all(nmax, x).iter().map(|v| v.abs()).collect();
    let amax = a.iter().cloned().fold(0.0, f64::max);
    let thresh = PRUNE_REL * amax.powi(d as i32);
    let mut fact = vec![1u64; d + 1];
    for k in 1..=d {
        fact[k] = fact[k - 1] * k as u64;
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    fn rec(
        level: usize,
        upper: usize,
        prod: f64,
        a: &[f64],
        amax: f64,
        thresh: f64,
        fact: &[u64],
        idx: &mut [usize],
        out: &mut Vec<(f64, u64)>,
    ) {
        let d = idx.len();
        if level == d {
            let mut mult = fact[d];
            let mut run = 1;
            for k in 1..=d {
                if k < d && idx[k] == idx[k - 1] {
                    run += 1;
                } else {
                    mult /= fact[run];
                    run = 1;
                }
            }
            let nonzero = idx.iter().filter(|&&n| n > 0).count() as u32;
            out.push((prod, mult << nonzero));
            return;
        }
        let rest = amax.powi((d - level - 1) as i32);
        for n in 0..=upper {
            let q = prod * a[n];
            if q * rest < thresh {
                continue;
            }
            idx[level] = n;
            rec(level + 1, n, q, a, amax, thresh, fact, idx, out);
        }
    }
    rec(0, nmax, 1.0, &a, amax, thresh, &fact, &mut idx, &mut out);
    out
}

/// Strichartz norm of `delta_0` on all of `Z^d` from exact Bessel products.
pub fn strichartz_delta(d: usize, t_max: f64) -> Result<StrichartzReport> {
    let p = strichartz_exponent(d)?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidInput(format!("T = {t_max} must be positive")));
    }
    let grid = time_grid(t_max);
    let samples: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| lorentz_norm_counted(delta_magnitudes(d, t), p, 2.0).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    let value = (2.0 * trapezoid_sq(&samples)).sqrt();
    Ok(StrichartzReport {
        d,
        p,
        r: 2.0,
        t_max,
        value,
        method: StrichartzMethod::BesselProduct,
        samples,
    })
}

/// Ratio `value(2T) / value(T)` for `delta_0`.
pub fn doubling_ratio(d: usize, t_max: f64) -> Result<(StrichartzReport, StrichartzReport)> {
    Ok((strichartz_delta(d, t_max)?, strichartz_delta(d, 2.0 * t_max)?))
}

/// Box with the smallest radius whose horizon covers `t_max`.
pub fn box_for(d: usize, t_max: f64) -> LatticeBox {
    LatticeBox::new(d, required_radius(t_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn grid_shape() {
        let g = time_grid(3.0);
        assert_eq!(g[512], 1.0);
        assert!((g[1] - FINE_STEP).abs() < 1e-15);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert!(g.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= MAX_STEP + 1e-12));
    }

    #[test]
    fn multiplicities_count_every_site() {
        let d = 4;
        let t = 1.5;
        let mags = delta_magnitudes(d, t);
        let l2: f64 = mags.iter().map(|&(v, c)| v * v * c as f64).sum();
        assert!((l2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_products_match_box_evolution() {
        let bx = LatticeBox::new(4, 7);
        let u0 = LatticeFn::delta(bx, &[0, 0, 0, 0]).unwrap();
        let spec = SpectralData::new(&u0);
        let p = strichartz_exponent(4).unwrap();
        for t in [0.3, 1.0] {
            let u = spec.evolve_unchecked(t);
            let mags: Vec<f64> = u.values.iter().map(|v| v.norm()).collect();
            let a = lorentz_norm(&mags, p, 2.0).unwrap();
            let b = lorentz_norm_counted(delta_magnitudes(4, t), p, 2.0).unwrap();
            assert!((a - b).abs() < 1e-9 * b, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_data_homogeneity_and_dimension() {
        let bx = LatticeBox::new(4, 3);
        assert_eq!(strichartz_norm(&LatticeFn::zeros(bx), 0.5).unwrap().value, 0.0);
        let u = LatticeFn::from_fn(bx, |x| Complex64::new(1.0 / (1 + x[0].abs()) as f64, 0.2 * x[3] as f64));
        let a = strichartz_norm(&u, 0.5).unwrap().value;
        let b = strichartz_norm(&u.scale(Complex64::new(2.0, 0.0)), 0.5).unwrap().value;
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
        assert!(matches!(strichartz_delta(3, 1.0), Err(Error::DimensionTooSmall(3))));
    }
}
