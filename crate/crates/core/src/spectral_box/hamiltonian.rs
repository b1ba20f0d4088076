use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, LatticeBox, Potential};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Compressed sparse rows, real entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (self.indptr[i], self.indptr[i + 1]);
            *yi = self.indices[a..b].iter().zip(&self.data[a..b]).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(k) => self.data[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k])] = self.data[k];
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (self.indptr[i]..self.indptr[i + 1]).all(|k| self.get(self.indices[k], i) == self.data[k]))
    }

    /// Row-sum bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[self.indptr[i]..self.indptr[i + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Coordinate text: header `n n nnz`, then one-based `i j value` lines.
    pub fn to_coo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n, self.n, self.data.len());
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let _ = writeln!(s, "{} {} {:e}", i + 1, self.indices[k] + 1, self.data[k]);
            }
        }
        s
    }
}

/// `H0 + lambda V + W` on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxHamiltonian {
    pub bx: LatticeBox,
    pub bc: BoundaryCondition,
    pub lambda: f64,
    pub v: Potential,
    pub w: Potential,
    /// `lambda V + W` in box order.
    pub perturbation: Vec<f64>,
    pub matrix: CsrMatrix,
}

impl BoxHamiltonian {
    pub fn len(&self) -> usize {
        self.matrix.n
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n == 0
    }

    /// True when `lambda V` vanishes on the box.
    pub fn is_free_plus_w(&self) -> bool {
        self.lambda == 0.0 || self.bx.sites().all(|x| self.v.eval(&x) == 0.0)
    }

    pub fn w_support(&self) -> Vec<(Vec<i64>, f64)> {
        self.w.support().unwrap_or_default()
    }

    pub fn norm_bound(&self) -> f64 {
        self.matrix.gershgorin_bound()
    }
}

/// Largest `|x_j|` admissible for the support of `W`.
pub fn margin_limit(r: usize) -> usize {
    r - r.div_ceil(2)
}

pub fn build_hamiltonian(
    bx: &LatticeBox,
    bc: BoundaryCondition,
    v: &Potential,
    lambda: f64,
    w: &Potential,
) -> Result<BoxHamiltonian> {
    let support = w
        .support()
        .ok_or_else(|| Error::InvalidInput("W must be finitely supported (point mass or table)".into()))?;
    let limit = margin_limit(bx.r) as u64;
    for (x, _) in &support {
        if x.len() != bx.d {
            return Err(Error::InvalidInput(format!("W site {x:?} has the wrong dimension")));
        }
        if x.iter().any(|c| c.unsigned_abs() > limit) {
            return Err(Error::InvalidInput(format!(
                "W support site {x:?} violates the boundary margin: need |x_j| <= {limit} in a box of radius {}",
                bx.r
            )));
        }
    }
    let d = bx.d;
    let mut perturbation: Vec<f64> = if lambda == 0.0 {
        vec![0.0; bx.len()]
    } else {
        bx.sites().map(|x| lambda * v.eval(&x)).collect()
    };
    for (x, val) in &support {
        perturbation[bx.index(x).expect("support inside box")] += val;
    }
    let n = bx.len();
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(n * (2 * d + 1));
    let mut data = Vec::with_capacity(n * (2 * d + 1));
    indptr.push(0);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * d + 1);
    for (i, x) in bx.sites().enumerate() {
        row.clear();
        row.push((i, 2.0 * d as f64 + perturbation[i]));
        let mut y = x.clone();
        for j in 0..d {
            for step in [-1i64, 1] {
                y[j] = x[j] + step;
                let k = match bc {
                    BoundaryCondition::Dirichlet => bx.index(&y),
                    BoundaryCondition::Periodic => Some(bx.index_periodic(&y)),
                };
                if let Some(k) = k {
                    row.push((k, -1.0));
                }
            }
            y[j] = x[j];
        }
        row.sort_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for &(k, v) in &row {
            if last == Some(k) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(k);
                data.push(v);
                last = Some(k);
            }
        }
        indptr.push(indices.len());
    }
    Ok(BoxHamiltonian {
        bx: *bx,
        bc,
        lambda,
        v: v.clone(),
        w: w.clone(),
        perturbation,
        matrix: CsrMatrix { n, indptr, indices, data },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> Potential {
        Potential::table([])
    }

    #[test]
    fn one_dimensional_dirichlet_matrix() {
        let h = build_hamiltonian(&LatticeBox::new(1, 1), BoundaryCondition::Dirichlet, &zero(), 0.0, &zero()).unwrap();
        let m = h.matrix.to_dense();
        let want = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert_eq!(m, want);
        assert!(h.matrix.to_coo().starts_with("3 3 7\n1 1 2e0\n"));
    }

    #[test]
    fn row_sums_and_symmetry() {
        let bx = LatticeBox::new(2, 3);
        let p = build_hamiltonian(&bx, BoundaryCondition::Periodic, &zero(), 0.0, &zero()).unwrap();
        assert!(p.matrix.is_symmetric());
        let ones = vec![1.0; bx.len()];
        let mut y = vec![0.0; bx.len()];
        p.matrix.apply(&ones, &mut y);
        assert!(y.iter().all(|&v| v == 0.0));
        let dd = build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &zero(), 0.0, &zero()).unwrap();
        dd.matrix.apply(&ones, &mut y);
        assert!(y.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn margin_is_enforced() {
        let bx = LatticeBox::new(3, 15);
        let ok = Potential::table([(vec![7, -7, 0], -1.0)]);
        assert!(build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &zero(), 0.0, &ok).is_ok());
        let bad = Potential::table([(vec![8, 0, 0], -1.0)]);
        assert!(matches!(
            build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &zero(), 0.0, &bad),
            Err(Error::InvalidInput(_))
        ));
    }
}
