use crate::error::{Error, Result};
use crate::lattice::symbol::symbol_eval;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// The cube `{x in Z^d : max_j |x_j| <= R}`.
///
/// Sites are ordered lexicographically with the first coordinate varying
/// slowest: index `sum_j (x_j + R) (2R+1)^(d-1-j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub d: usize,
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
    Periodic,
}

impl LatticeBox {
    pub fn new(d: usize, r: usize) -> Self {
        assert!(d >= 1, "dimension must be >= 1");
        Self { d, r }
    }

    pub fn side(&self) -> usize {
        2 * self.r + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn site(&self, mut index: usize) -> Vec<i64> {
        let l = self.side();
        let mut x = vec![0i64; self.d];
        for j in (0..self.d).rev() {
            x[j] = (index % l) as i64 - self.r as i64;
            index /= l;
        }
        x
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d && x.iter().all(|&c| c.unsigned_abs() as usize <= self.r)
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let l = self.side();
        Some(
            x.iter()
                .fold(0usize, |acc, &c| acc * l + (c + self.r as i64) as usize),
        )
    }

    /// Index of `x` reduced into the box modulo `2R+1` per axis.
    pub fn index_periodic(&self, x: &[i64]) -> usize {
        let l = self.side() as i64;
        x.iter().fold(0usize, |acc, &c| {
            acc * l as usize + (c + self.r as i64).rem_euclid(l) as usize
        })
    }

    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    /// Euclidean norm of every site, in box order.
    pub fn radii(&self) -> Vec<f64> {
        self.sites()
            .map(|x| (x.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt())
            .collect()
    }
}

/// A complex function on the sites of a box, stored in box order.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFn {
    pub bx: LatticeBox,
    pub values: Vec<Complex64>,
}

impl LatticeFn {
    pub fn zeros(bx: LatticeBox) -> Self {
        Self {
            bx,
            values: vec![Complex64::new(0.0, 0.0); bx.len()],
        }
    }

    pub fn from_values(bx: LatticeBox, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != bx.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                bx.len(),
                values.len()
            )));
        }
        Ok(Self { bx, values })
    }

    pub fn from_fn(bx: LatticeBox, f: impl Fn(&[i64]) -> Complex64) -> Self {
        let values = bx.sites().map(|x| f(&x)).collect();
        Self { bx, values }
    }

    pub fn delta(bx: LatticeBox, site: &[i64]) -> Result<Self> {
        let i = bx
            .index(site)
            .ok_or_else(|| Error::InvalidInput(format!("site {site:?} outside box")))?;
        let mut u = Self::zeros(bx);
        u.values[i] = Complex64::new(1.0, 0.0);
        Ok(u)
    }

    /// Plane wave `exp(2 pi i x . k / (2R+1))`.
    pub fn plane_wave(bx: LatticeBox, k: &[i64]) -> Self {
        let l = bx.side() as f64;
        Self::from_fn(bx, |x| {
            let ph: f64 = x.iter().zip(k).map(|(&a, &b)| (a * b) as f64).sum::<f64>() / l;
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ph)
        })
    }

    pub fn get(&self, x: &[i64]) -> Option<Complex64> {
        self.bx.index(x).map(|i| self.values[i])
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            bx: self.bx,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// CSV with columns `x_1..x_d,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for j in 0..self.bx.d {
            let _ = write!(s, "x{},", j + 1);
        }
        s.push_str("re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            for c in self.bx.site(i) {
                let _ = write!(s, "{c},");
            }
            let _ = writeln!(s, "{:e},{:e}", v.re, v.im);
        }
        s
    }
}

/// `(H0 u)(x) = 2d u(x) - sum_{|x-y|=1} u(y)`.
pub fn apply_h0(u: &LatticeFn, bc: BoundaryCondition) -> LatticeFn {
    let bx = u.bx;
    let d = bx.d;
    let l = bx.side();
    let mut out = LatticeFn::zeros(bx);
    let mut stride = vec![1usize; d];
    for j in (0..d.saturating_sub(1)).rev() {
        stride[j] = stride[j + 1] * l;
    }
    for i in 0..bx.len() {
        let mut acc = u.values[i] * (2 * d) as f64;
        for &st in &stride {
            let c = (i / st) % l;
            if c + 1 < l {
                acc -= u.values[i + st];
            } else if bc == BoundaryCondition::Periodic {
                acc -= u.values[i + st - l * st];
            }
            if c > 0 {
                acc -= u.values[i - st];
            } else if bc == BoundaryCondition::Periodic {
                acc -= u.values[i + (l - 1) * st];
            }
        }
        out.values[i] = acc;
    }
    out
}

/// Eigenvalue of the periodic box Laplacian on the plane wave with index `k`.
pub fn periodic_eigenvalue(bx: &LatticeBox, k: &[i64]) -> f64 {
    let l = bx.side() as f64;
    let xi: Vec<f64> = k.iter().map(|&c| c as f64 / l).collect();
    symbol_eval(&xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_round_trip() {
        let bx = LatticeBox::new(3, 2);
        assert_eq!(bx.len(), 125);
        for i in 0..bx.len() {
            assert_eq!(bx.index(&bx.site(i)), Some(i));
        }
        assert_eq!(bx.site(0), vec![-2, -2, -2]);
        assert_eq!(bx.site(1), vec![-2, -2, -1]);
        assert_eq!(bx.index(&[0, 0, 0]), Some(62));
        assert_eq!(bx.index(&[3, 0, 0]), None);
    }

    #[test]
    fn h0_on_delta() {
        let bx = LatticeBox::new(1, 3);
        let u = LatticeFn::delta(bx, &[0]).unwrap();
        let v = apply_h0(&u, BoundaryCondition::Dirichlet);
        let re: Vec<f64> = v.values.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn constants_are_harmonic_on_periodic_box() {
        let bx = LatticeBox::new(2, 3);
        let u = LatticeFn::from_fn(bx, |_| Complex64::new(1.0, 0.0));
        let v = apply_h0(&u, BoundaryCondition::Periodic);
        assert!(v.sup_norm() < 1e-14);
    }

    #[test]
    fn plane_waves_diagonalize_periodic_box() {
        let bx = LatticeBox::new(3, 2);
        let k = [1, -2, 2];
        let u = LatticeFn::plane_wave(bx, &k);
        let v = apply_h0(&u, BoundaryCondition::Periodic);
        let lam = periodic_eigenvalue(&bx, &k);
        for (a, b) in v.values.iter().zip(&u.values) {
            assert!((a - b * lam).norm() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_matrix_is_symmetric() {
        let bx = LatticeBox::new(2, 2);
        let n = bx.len();
        let mut m = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut e = LatticeFn::zeros(bx);
            e.values[j] = Complex64::new(1.0, 0.0);
            let col = apply_h0(&e, BoundaryCondition::Dirichlet);
            for i in 0..n {
                m[i][j] = col.values[i].re;
                assert_eq!(col.values[i].im, 0.0);
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }
}
