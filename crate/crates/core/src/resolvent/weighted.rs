//! Norms of `<x>^{-alpha} (H0 - z)^{-1} <y>^{-beta}` on a box.

use crate::birman_schwinger::matrix::{BsOperator, NORM_MAX_ITER, NORM_TOL};
use crate::error::Result;
use crate::lattice::{japanese, ComplexEnergy, LatticeBox};
use crate::linalg::largest_singular_value;
use crate::resolvent::kernel::{kernel_table_1d_exact, kernel_table_refined, KernelTable, Quadrature, ResolutionRule};
use serde::{Deserialize, Serialize};

/// Relative truncation tolerance used by [`auto_radius`].
pub const TRUNCATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormConfig {
    pub grid_n: usize,
    pub max_grid_n: usize,
    pub quadrature: Quadrature,
    pub rule: ResolutionRule,
    pub seed: u64,
}

impl Default for WeightedNormConfig {
    fn default() -> Self {
        Self {
            grid_n: 256,
            max_grid_n: 512,
            quadrature: Quadrature::shifted(),
            rule: ResolutionRule::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub alpha: f64,
    pub beta: f64,
    pub z: ComplexEnergy,
    pub radius: usize,
    pub norm: f64,
    pub iterations: usize,
    pub grid_n: usize,
    pub kernel_error: f64,
    /// `<R>^{-min(alpha, beta)} * sum_x |G0(x)|`.
    pub tail_bound: f64,
}

/// Smallest radius with `<R>^{-min(alpha, beta)} < tol`, capped at `max_r`.
pub fn auto_radius(alpha: f64, beta: f64, tol: f64, max_r: usize) -> usize {
    let a = alpha.min(beta);
    if a <= 0.0 {
        return max_r;
    }
    let r = (tol.powf(-2.0 / a) - 1.0).max(0.0).sqrt().ceil();
    if r.is_finite() && r < max_r as f64 {
        r as usize
    } else {
        max_r
    }
}

pub fn weights(bx: &LatticeBox, exponent: f64) -> Vec<f64> {
    bx.radii().iter().map(|&r| japanese(r).powf(-exponent)).collect()
}

/// Kernel table covering all offsets of `bx`; exact in one dimension.
pub fn box_table(bx: &LatticeBox, z: ComplexEnergy, cfg: &WeightedNormConfig) -> Result<KernelTable> {
    if bx.d == 1 {
        kernel_table_1d_exact(2 * bx.r, z)
    } else {
        kernel_table_refined(bx.d, 2 * bx.r, z, cfg.grid_n, cfg.max_grid_n, cfg.quadrature, &cfg.rule)
    }
}

/// Largest singular value of `<x>^{-alpha} T(x - y) <y>^{-beta}` for a
/// kernel table `T`.
pub fn weighted_table_norm(bx: &LatticeBox, table: &KernelTable, alpha: f64, beta: f64, seed: u64) -> Result<(f64, usize)> {
    let conv = BsOperator::convolver(bx, table)?;
    let op = BsOperator::new(*bx, weights(bx, alpha), weights(bx, beta), conv);
    let est = largest_singular_value(&op, NORM_TOL, NORM_MAX_ITER, seed)?;
    Ok((est.sigma, est.iterations))
}

pub fn weighted_resolvent_norm(
    alpha: f64,
    beta: f64,
    z: ComplexEnergy,
    bx: &LatticeBox,
    cfg: &WeightedNormConfig,
) -> Result<WeightedNorm> {
    let table = box_table(bx, z, cfg)?;
    let (norm, iterations) = weighted_table_norm(bx, &table, alpha, beta, cfg.seed)?;
    Ok(WeightedNorm {
        alpha,
        beta,
        z,
        radius: bx.r,
        norm,
        iterations,
        grid_n: table.n,
        kernel_error: table.error_estimate,
        tail_bound: japanese(bx.r as f64).powf(-alpha.min(beta)) * table.l1_norm(),
    })
}
