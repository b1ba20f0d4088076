//! Exact multiplier evolution `e^{-itH0}` on periodic boxes.

use crate::error::{Error, Result};
use crate::fft::fft_cube;
use crate::lattice::symbol::symbol_1d;
use crate::lattice::{LatticeBox, LatticeFn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Largest `|t|` for which a packet launched at the origin of a periodic
/// box does not wrap: `L / (4 pi)` with `L = 2R + 1`.
pub fn revival_horizon(bx: &LatticeBox) -> f64 {
    bx.side() as f64 / (4.0 * PI)
}

/// Smallest radius whose revival horizon covers `|t|`.
pub fn required_radius(t: f64) -> usize {
    let side = (4.0 * PI * t.abs()).ceil() as usize;
    side.saturating_sub(1).div_ceil(2)
}

fn check_horizon(bx: &LatticeBox, t: f64) -> Result<()> {
    let horizon = revival_horizon(bx);
    if t.abs() > horizon {
        return Err(Error::RevivalHorizon {
            t,
            horizon,
            required_radius: required_radius(t),
        });
    }
    Ok(())
}

/// `u0` in frequency space together with the symbol on the dual grid.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub bx: LatticeBox,
    coeffs: Vec<Complex64>,
    symbol: Vec<f64>,
}

impl SpectralData {
    pub fn new(u0: &LatticeFn) -> Self {
        let bx = u0.bx;
        let (d, l) = (bx.d, bx.side());
        let mut coeffs = u0.values.clone();
        fft_cube(&mut coeffs, d, l, false);
        let h1: Vec<f64> = (0..l).map(|m| symbol_1d(m as f64 / l as f64)).collect();
        let mut symbol = vec![0.0; bx.len()];
        for (i, s) in symbol.iter_mut().enumerate() {
            let mut rest = i;
            for _ in 0..d {
                *s += h1[rest % l];
                rest /= l;
            }
        }
        Self { bx, coeffs, symbol }
    }

    /// `e^{-itH0} u0`, ignoring the revival horizon.
    pub fn evolve_unchecked(&self, t: f64) -> LatticeFn {
        let (d, l) = (self.bx.d, self.bx.side());
        let norm = 1.0 / self.bx.len() as f64;
        let mut v: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&self.symbol)
            .map(|(c, &h)| c * Complex64::from_polar(norm, -t * h))
            .collect();
        fft_cube(&mut v, d, l, true);
        LatticeFn { bx: self.bx, values: v }
    }

    pub fn evolve(&self, t: f64) -> Result<LatticeFn> {
        check_horizon(&self.bx, t)?;
        Ok(self.evolve_unchecked(t))
    }
}

/// `e^{-itH0} u0` on the periodic box carrying `u0`.
pub fn propagate(u0: &LatticeFn, t: f64) -> Result<LatticeFn> {
    check_horizon(&u0.bx, t)?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    Ok(SpectralData::new(u0).evolve_unchecked(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRun {
    pub bx: LatticeBox,
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub l2_norms: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Vec<LatticeFn>,
}

impl EvolutionRun {
    /// Columns `t,sup_norm,l2_norm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,sup_norm,l2_norm\n");
        for ((t, a), b) in self.times.iter().zip(&self.sup_norms).zip(&self.l2_norms) {
            let _ = writeln!(s, "{t:e},{a:e},{b:e}");
        }
        s
    }
}

/// Snapshots of `e^{-itH0} u0` at every `t` in `times`.
pub fn evolve(u0: &LatticeFn, times: &[f64], keep_snapshots: bool) -> Result<EvolutionRun> {
    for &t in times {
        check_horizon(&u0.bx, t)?;
    }
    let spec = SpectralData::new(u0);
    let snaps: Vec<LatticeFn> = times.par_iter().map(|&t| spec.evolve_unchecked(t)).collect();
    Ok(EvolutionRun {
        bx: u0.bx,
        times: times.to_vec(),
        sup_norms: snaps.iter().map(|u| u.sup_norm()).collect(),
        l2_norms: snaps.iter().map(|u| u.l2_norm()).collect(),
        snapshots: if keep_snapshots { snaps } else { Vec::new() },
    })
}

/// Retarded Duhamel term `-i int_0^t e^{-i(t-s)H0} F(s) ds` by the
/// trapezoid rule with `steps` panels.
pub fn duhamel(bx: &LatticeBox, forcing: impl Fn(f64) -> LatticeFn + Sync, t: f64, steps: usize) -> Result<LatticeFn> {
    check_horizon(bx, t)?;
    let steps = steps.max(1);
    let h = t / steps as f64;
    let terms: Vec<LatticeFn> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let s = k as f64 * h;
            let f = forcing(s);
            if f.bx != *bx {
                return Err(Error::InvalidInput("forcing lives on a different box".into()));
            }
            let w = if k == 0 || k == steps { 0.5 * h } else { h };
            Ok(SpectralData::new(&f).evolve_unchecked(t - s).scale(Complex64::new(0.0, -w)))
        })
        .collect::<Result<_>>()?;
    let mut out = LatticeFn::zeros(*bx);
    for term in terms {
        for (o, v) in out.values.iter_mut().zip(term.values) {
            *o += v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::lattice_box::periodic_eigenvalue;

    fn close(a: &LatticeFn, b: &LatticeFn, tol: f64) -> bool {
        a.values.iter().zip(&b.values).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn identity_at_zero_and_plane_waves() {
        let bx = LatticeBox::new(2, 6);
        let u = LatticeFn::plane_wave(bx, &[3, -2]);
        assert_eq!(propagate(&u, 0.0).unwrap(), u);
        let t = 0.7;
        let phase = Complex64::from_polar(1.0, -t * periodic_eigenvalue(&bx, &[3, -2]));
        assert!(close(&propagate(&u, t).unwrap(), &u.scale(phase), 1e-12));
    }

    #[test]
    fn horizon_error_reports_radius() {
        let bx = LatticeBox::new(1, 10);
        match propagate(&LatticeFn::delta(bx, &[0]).unwrap(), 5.0) {
            Err(Error::RevivalHorizon { required_radius, .. }) => {
                let big = LatticeBox::new(1, required_radius);
                assert!(revival_horizon(&big) >= 5.0);
                assert!(revival_horizon(&LatticeBox::new(1, required_radius - 1)) < 5.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn additivity_and_unitarity() {
        let bx = LatticeBox::new(2, 12);
        let u = LatticeFn::from_fn(bx, |x| Complex64::new((x[0] as f64).sin(), 0.1 * x[1] as f64));
        let a = propagate(&propagate(&u, 0.4).unwrap(), 0.5).unwrap();
        let b = propagate(&u, 0.9).unwrap();
        assert!(close(&a, &b, 1e-12));
        assert!((b.l2_norm() / u.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duhamel_of_free_forcing() {
        let bx = LatticeBox::new(1, 20);
        let g = LatticeFn::delta(bx, &[1]).unwrap();
        let spec = SpectralData::new(&g);
        let t = 1.3;
        let u = duhamel(&bx, |s| spec.evolve_unchecked(s), t, 4).unwrap();
        let want = spec.evolve_unchecked(t).scale(Complex64::new(0.0, -t));
        assert!(close(&u, &want, 1e-12));
    }
}
