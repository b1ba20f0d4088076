use crate::error::{Error, Result};
use crate::lattice::symbol::symbol_1d;
use serde::{Deserialize, Serialize};

/// Default upper bound on `N^d`.
pub const DEFAULT_NODE_BUDGET: u128 = 1 << 31;

/// Uniform grid `k / N`, `k in {0..N-1}^d`, on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_budget(d, n, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(d: usize, n: usize, budget: u128) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        let nodes = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if nodes > budget {
            return Err(Error::Budget { nodes, budget });
        }
        Ok(Self { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node_count(&self) -> u128 {
        (self.n as u128).pow(self.d as u32)
    }

    /// Per-axis samples of `4 sin^2(pi k / N)`; `h0` on a node is the sum over axes.
    pub fn axis_symbol(&self) -> Vec<f64> {
        (0..self.n).map(|k| symbol_1d(k as f64 / self.n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TorusGrid::new(3, 8).is_err());
        assert!(TorusGrid::new(3, 48).is_err());
        assert!(TorusGrid::new(0, 16).is_err());
        assert!(matches!(
            TorusGrid::with_budget(3, 64, 1000),
            Err(Error::Budget { .. })
        ));
        let g = TorusGrid::new(2, 64).unwrap();
        assert_eq!(g.node_count(), 4096);
        assert_eq!(g.spacing(), 1.0 / 64.0);
    }
}
