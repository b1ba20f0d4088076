//! Decay exponent of `||e^{-itH0} delta_0||_inf`.

use crate::dynamics::propagator::{evolve, required_radius, revival_horizon, EvolutionRun};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, logspace};
use crate::lattice::{japanese, LatticeBox, LatticeFn};
use serde::{Deserialize, Serialize};

pub const INCONCLUSIVE_RESIDUAL: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Radius of the one-dimensional periodic box; smallest admissible
    /// FFT-friendly radius when absent.
    pub radius: Option<usize>,
}

impl Default for DispersiveConfig {
    fn default() -> Self {
        Self {
            t_min: 1e2,
            t_max: 1e4,
            samples: 25,
            radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersiveMethod {
    Direct,
    /// `delta_0` factorizes, so the sup-norm is the `d`-th power of the
    /// one-dimensional one.
    TensorProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveFit {
    pub d: usize,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub window: [f64; 2],
    pub inconclusive: bool,
    pub radius: usize,
    pub method: DispersiveMethod,
    /// `max_t ||u(t)||_inf <t>^{d/3}` over the window.
    pub envelope_constant: f64,
    pub run: EvolutionRun,
}

/// Smallest odd `n >= min` whose prime factors lie in {3, 5, 7}.
pub fn odd_smooth_len(min: usize) -> usize {
    let mut n = min.max(1) | 1;
    loop {
        let mut m = n;
        for p in [3, 5, 7] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 2;
    }
}

pub fn dispersive_fit(d: usize, cfg: &DispersiveConfig) -> Result<DispersiveFit> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if !(cfg.t_min > 0.0 && cfg.t_max > cfg.t_min && cfg.samples >= 2) {
        return Err(Error::InvalidInput(format!(
            "need 0 < t_min < t_max and at least two samples, got [{}, {}] x {}",
            cfg.t_min, cfg.t_max, cfg.samples
        )));
    }
    let r = match cfg.radius {
        Some(r) => r,
        None => (odd_smooth_len(2 * required_radius(cfg.t_max) + 1) - 1) / 2,
    };
    let bx = LatticeBox::new(1, r);
    let horizon = revival_horizon(&bx);
    if cfg.t_max > horizon {
        return Err(Error::RevivalHorizon {
            t: cfg.t_max,
            horizon,
            required_radius: required_radius(cfg.t_max),
        });
    }
    let times = logspace(cfg.t_min, cfg.t_max, cfg.samples);
    let mut run = evolve(&LatticeFn::delta(bx, &[0])?, &times, false)?;
    let method = if d == 1 {
        DispersiveMethod::Direct
    } else {
        for v in run.sup_norms.iter_mut() {
            *v = v.powi(d as i32);
        }
        DispersiveMethod::TensorProduct
    };
    let fit = loglog_fit(&times, &run.sup_norms);
    let envelope_constant = times
        .iter()
        .zip(&run.sup_norms)
        .map(|(&t, &s)| s * japanese(t).powf(d as f64 / 3.0))
        .fold(0.0, f64::max);
    Ok(DispersiveFit {
        d,
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        window: [cfg.t_min, cfg.t_max],
        inconclusive: fit.residual > INCONCLUSIVE_RESIDUAL,
        radius: r,
        method,
        envelope_constant,
        run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagator::propagate;

    #[test]
    fn odd_smooth_lengths() {
        assert_eq!(odd_smooth_len(1), 1);
        assert_eq!(odd_smooth_len(22), 25);
        assert_eq!(odd_smooth_len(100), 105);
        assert_eq!(odd_smooth_len(99), 105);
    }

    #[test]
    fn tensor_product_matches_direct_two_dimensional_run() {
        let t = 3.0;
        let r = required_radius(t) + 2;
        let one = propagate(&LatticeFn::delta(LatticeBox::new(1, r), &[0]).unwrap(), t).unwrap();
        let two = propagate(&LatticeFn::delta(LatticeBox::new(2, r), &[0, 0]).unwrap(), t).unwrap();
        assert!((one.sup_norm().powi(2) - two.sup_norm()).abs() < 1e-13);
    }

    #[test]
    fn short_window_fit() {
        let cfg = DispersiveConfig {
            t_min: 50.0,
            t_max: 500.0,
            samples: 8,
            radius: None,
        };
        let fit = dispersive_fit(1, &cfg).unwrap();
        assert!((fit.slope + 1.0 / 3.0).abs() < 0.05, "{fit:?}");
        assert!(!fit.inconclusive);
        let small = DispersiveConfig { radius: Some(100), ..cfg };
        assert!(matches!(dispersive_fit(1, &small), Err(Error::RevivalHorizon { .. })));
    }
}
