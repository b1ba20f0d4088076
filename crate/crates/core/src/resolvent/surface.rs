//! Spectral-shell operators `chi(D) delta(H0 - mu)` by graph patches of the
//! level set `{h0 = mu}`.
//!
//! On a patch the axis `a` with the largest `|d h0 / d xi_a|` at the patch
//! centre is solved for, `xi_a = g(xi')`, and the surface measure over the
//! gradient becomes `d sigma / |grad h0| = d xi' / |d_a h0|`. Since `h0` is
//! separable the root is explicit: `sin^2(pi xi_a) = (mu - h0'(xi')) / 4`.

use crate::error::{Error, Result};
use crate::lattice::symbol::{critical_points, reduce_mod1, symbol_1d, symbol_gradient, threshold_energies};
use crate::lattice::{LatticeBox, LatticeFn};
use crate::special::BumpProfile;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest admissible `|d_a h0|` on a patch.
pub const GRADIENT_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cutoff {
    /// `chi = 1`; one dimension only.
    Whole,
    /// `chi(xi) = prod_j B((xi_j - c_j) / (4 r_j))` with the shipped bump
    /// `B`, supported in `|xi_j - c_j| < r_j`.
    Bump { center: Vec<f64>, radius: Vec<f64> },
}

impl Cutoff {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            Cutoff::Whole => 1.0,
            Cutoff::Bump { center, radius } => xi
                .iter()
                .zip(center.iter().zip(radius))
                .map(|(&x, (&c, &r))| BumpProfile::eval(wrap(x - c) / (4.0 * r)))
                .product(),
        }
    }
}

/// Representative of `t` in `[-1/2, 1/2)`.
fn wrap(t: f64) -> f64 {
    let r = reduce_mod1(t + 0.5);
    r - 0.5
}

/// Quadrature nodes on the surface with weights `d xi' / |d_a h0|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceQuadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// One graph patch of `{h0 = mu}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSlice {
    pub d: usize,
    pub mu: f64,
    /// Solved axis.
    pub axis: usize,
    pub center: Vec<f64>,
    /// Half-widths of the parameter box in every coordinate; the entry of
    /// the solved axis bounds the admissible root.
    pub half_widths: Vec<f64>,
}

impl SurfaceSlice {
    pub fn new(mu: f64, center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        let d = center.len();
        if d == 0 || half_widths.len() != d {
            return Err(Error::InvalidInput("patch centre and widths must have equal length d >= 1".into()));
        }
        if !(mu > 0.0 && mu < 4.0 * d as f64) {
            return Err(Error::InvalidInput(format!("energy {mu} outside (0, {})", 4 * d)));
        }
        let grad = symbol_gradient(&center);
        let mut axis = 0;
        for (j, g) in grad.iter().enumerate() {
            if g.abs() > grad[axis].abs() {
                axis = j;
            }
        }
        Ok(Self {
            d,
            mu,
            axis,
            center,
            half_widths,
        })
    }

    /// Root of `h0 = mu` along the solved axis nearest the patch centre, or
    /// `None` outside the patch.
    pub fn solve(&self, xi: &mut [f64]) -> Option<f64> {
        let a = self.axis;
        let rest: f64 = (0..self.d).filter(|&j| j != a).map(|j| symbol_1d(xi[j])).sum();
        let s = (self.mu - rest) / 4.0;
        if !(0.0..=1.0).contains(&s) {
            return None;
        }
        let theta = s.sqrt().asin() / PI;
        let c = self.center[a];
        let best = [theta, -theta, 1.0 - theta, theta - 1.0]
            .into_iter()
            .map(|r| c + wrap(r - c))
            .min_by(|x, y| (x - c).abs().total_cmp(&(y - c).abs()))?;
        if (best - c).abs() > self.half_widths[a] {
            return None;
        }
        xi[a] = best;
        Some(4.0 * PI * (2.0 * PI * best).sin().abs())
    }

    /// Midpoint rule with `n` nodes per free axis.
    pub fn nodes(&self, n: usize) -> Result<SurfaceQuadrature> {
        let free: Vec<usize> = (0..self.d).filter(|&j| j != self.axis).collect();
        let m = free.len();
        let total = n.pow(m as u32);
        let cell: f64 = free.iter().map(|&j| 2.0 * self.half_widths[j] / n as f64).product();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut xi = self.center.clone();
        for i in 0..total {
            let mut rem = i;
            for &j in free.iter().rev() {
                let k = rem % n;
                rem /= n;
                xi[j] = self.center[j] - self.half_widths[j] + (k as f64 + 0.5) * 2.0 * self.half_widths[j] / n as f64;
            }
            if let Some(g) = self.solve(&mut xi) {
                if g < GRADIENT_FLOOR {
                    return Err(Error::CutoffViolation(format!(
                        "|d h0| = {g:.3e} at {xi:?} on the patch at energy {}",
                        self.mu
                    )));
                }
                points.push(xi.clone());
                weights.push(cell / g);
            }
        }
        Ok(SurfaceQuadrature { points, weights })
    }

    /// `int g d sigma / |grad h0|` over the patch with an `n` versus `n/2`
    /// error estimate.
    pub fn integrate<V>(&self, g: impl Fn(&[f64]) -> V, n: usize) -> Result<(V, f64)>
    where
        V: Copy + std::ops::Add<Output = V> + std::ops::Mul<f64, Output = V> + Default + Into<Complex64>,
    {
        let run = |n: usize| -> Result<V> {
            let q = self.nodes(n)?;
            Ok(q.points.iter().zip(&q.weights).fold(V::default(), |acc, (p, &w)| acc + g(p) * w))
        };
        let fine = run(n)?;
        let coarse = run((n / 2).max(1))?;
        let err = (fine.into() - coarse.into()).norm();
        Ok((fine, err))
    }
}

fn check_thresholds(mu: f64, d: usize, cutoff: &Cutoff) -> Result<()> {
    if let Cutoff::Whole = cutoff {
        if d != 1 {
            return Err(Error::InvalidInput("the whole-surface cutoff is available in d = 1 only".into()));
        }
        for e in threshold_energies(d) {
            if (mu - e).abs() < GRADIENT_FLOOR {
                return Err(Error::CutoffViolation(format!("energy {mu} within {GRADIENT_FLOOR} of threshold {e}")));
            }
        }
    }
    if let Cutoff::Bump { center, radius } = cutoff {
        for cp in critical_points(d) {
            let inside = cp
                .location
                .iter()
                .zip(center.iter().zip(radius))
                .all(|(&g, (&c, &r))| wrap(g - c).abs() < r);
            let reach: f64 = radius.iter().map(|&r| symbol_1d(r.min(0.5))).sum();
            if inside && (mu - cp.energy).abs() <= reach {
                return Err(Error::CutoffViolation(format!(
                    "cutoff support contains the critical point {:?} and energy {mu} is within {reach:.3e} of {}",
                    cp.location, cp.energy
                )));
            }
        }
    }
    Ok(())
}

fn quadrature_for(mu: f64, d: usize, cutoff: &Cutoff, n: usize) -> Result<SurfaceQuadrature> {
    check_thresholds(mu, d, cutoff)?;
    match cutoff {
        Cutoff::Whole => {
            let theta = (mu / 4.0).sqrt().asin() / PI;
            let g = 4.0 * PI * (2.0 * PI * theta).sin().abs();
            Ok(SurfaceQuadrature {
                points: vec![vec![theta], vec![1.0 - theta]],
                weights: vec![1.0 / g, 1.0 / g],
            })
        }
        Cutoff::Bump { center, radius } => {
            if center.len() != d || radius.len() != d {
                return Err(Error::InvalidInput("cutoff centre and radius must have length d".into()));
            }
            let slice = SurfaceSlice::new(mu, center.clone(), radius.clone())?;
            let mut q = slice.nodes(n)?;
            for (p, w) in q.points.iter().zip(q.weights.iter_mut()) {
                *w *= cutoff.eval(p);
            }
            Ok(q)
        }
    }
}

fn apply_nodes(q: &SurfaceQuadrature, f: &LatticeFn, out: &LatticeBox) -> Vec<Complex64> {
    let support: Vec<(Vec<i64>, Complex64)> = f
        .bx
        .sites()
        .zip(&f.values)
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(x, v)| (x, *v))
        .collect();
    let mut vals = vec![Complex64::new(0.0, 0.0); out.len()];
    for (p, &w) in q.points.iter().zip(&q.weights) {
        if w == 0.0 {
            continue;
        }
        let fhat: Complex64 = support
            .iter()
            .map(|(y, v)| {
                let ph: f64 = y.iter().zip(p).map(|(&a, &b)| a as f64 * b).sum();
                v * Complex64::from_polar(1.0, -2.0 * PI * ph)
            })
            .sum();
        if fhat.norm() == 0.0 {
            continue;
        }
        let c = fhat * w;
        for (slot, x) in vals.iter_mut().zip(out.sites()) {
            let ph: f64 = x.iter().zip(p).map(|(&a, &b)| a as f64 * b).sum();
            *slot += c * Complex64::from_polar(1.0, 2.0 * PI * ph);
        }
    }
    vals
}

/// `(chi(D) delta(H0 - mu) f)(x)` for `x` in `out`, with the difference to
/// the half-resolution rule as error estimate.
pub fn delta_surface(mu: f64, f: &LatticeFn, cutoff: &Cutoff, out: &LatticeBox, n: usize) -> Result<(LatticeFn, f64)> {
    let d = f.bx.d;
    if out.d != d {
        return Err(Error::InvalidInput("output box dimension differs from f".into()));
    }
    let fine = apply_nodes(&quadrature_for(mu, d, cutoff, n)?, f, out);
    let coarse = apply_nodes(&quadrature_for(mu, d, cutoff, (n / 2).max(1))?, f, out);
    let err = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok((LatticeFn::from_values(*out, fine)?, err))
}
