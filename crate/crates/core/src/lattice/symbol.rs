//! The symbol `h0(xi) = 4 sum_j sin^2(pi xi_j)` of the negative discrete
//! Laplacian and its critical points.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One-dimensional factor `4 sin^2(pi t)`.
#[inline]
pub fn symbol_1d(t: f64) -> f64 {
    let s = (PI * t).sin();
    4.0 * s * s
}

/// Reduce a torus coordinate to `[0, 1)`.
#[inline]
pub fn reduce_mod1(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Evaluates `h0(xi)`.
///
/// The per-axis terms are summed in ascending order so the result is
/// bit-identical under permutations of the coordinates.
pub fn symbol_eval(xi: &[f64]) -> f64 {
    let mut terms: Vec<f64> = xi.iter().map(|&t| symbol_1d(reduce_mod1(t))).collect();
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite symbol term"));
    terms.iter().sum()
}

/// Gradient of `h0`, `d h0 / d xi_j = 4 pi sin(2 pi xi_j)`.
pub fn symbol_gradient(xi: &[f64]) -> Vec<f64> {
    xi.iter().map(|&t| 4.0 * PI * (2.0 * PI * t).sin()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Elliptic,
    Hyperbolic,
}

/// A critical point of `h0`: every coordinate is 0 or 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub location: Vec<f64>,
    pub energy: f64,
    pub kind: ThresholdKind,
    /// Number of positive Hessian directions (coordinates equal to 0).
    pub signature: usize,
}

/// All `2^d` critical points, ordered by the binary pattern of half-integer
/// coordinates (first coordinate most significant).
pub fn critical_points(d: usize) -> Vec<ThresholdPoint> {
    assert!(d >= 1, "dimension must be >= 1");
    (0..1usize << d)
        .map(|mask| {
            let location: Vec<f64> = (0..d)
                .map(|j| if mask >> (d - 1 - j) & 1 == 1 { 0.5 } else { 0.0 })
                .collect();
            let halves = location.iter().filter(|&&c| c == 0.5).count();
            let signature = d - halves;
            let kind = if signature == 0 || signature == d {
                ThresholdKind::Elliptic
            } else {
                ThresholdKind::Hyperbolic
            };
            ThresholdPoint {
                location,
                energy: 4.0 * halves as f64,
                kind,
                signature,
            }
        })
        .collect()
}

/// Distinct critical values `{0, 4, ..., 4d}`.
pub fn threshold_energies(d: usize) -> Vec<f64> {
    (0..=d).map(|k| 4.0 * k as f64).collect()
}
