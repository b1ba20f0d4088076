//! Eigenvalues of box Hamiltonians outside the band `[0, 4d]`.
//!
//! Three solvers: dense diagonalization for small boxes; for `H0 + W` with
//! finitely supported `W` under Dirichlet conditions, exact inertia counts of
//! the Schur complement `-D^{-1} - P (H0 - E)^{-1} P^T` on `supp W`
//! (the box Green function is summed in the explicit sine eigenbasis);
//! block Lanczos with full reorthogonalization otherwise.

use crate::error::{Error, Result};
use crate::lattice::BoundaryCondition;
use crate::spectral_box::hamiltonian::{BoxHamiltonian, CsrMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DENSE_MAX: usize = 1500;
/// Eigenvalues closer than this to `0` or `4d` are flagged, not classified.
pub const EDGE_TOL: f64 = 1e-8;
/// Eigenvalues closer than this (relative) form one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
pub const EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    Schur,
    BlockLanczos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigReport {
    pub d: usize,
    pub below: Vec<EigenCluster>,
    pub above: Vec<EigenCluster>,
    /// Eigenvalues within `EDGE_TOL` of `0` or `4d`.
    pub flagged: Vec<f64>,
    pub method: EigenMethod,
}

impl EigReport {
    pub fn count_below(&self) -> usize {
        self.below.iter().map(|c| c.multiplicity).sum()
    }

    pub fn count_above(&self) -> usize {
        self.above.iter().map(|c| c.multiplicity).sum()
    }

    /// `(eigenvalue, multiplicity)` pairs in increasing order.
    pub fn list(&self) -> Vec<(f64, usize)> {
        self.below.iter().chain(&self.above).map(|c| (c.value, c.multiplicity)).collect()
    }
}

fn cluster(sorted: &[f64]) -> Vec<EigenCluster> {
    let mut out: Vec<EigenCluster> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        let split = i == sorted.len() || sorted[i] - sorted[i - 1] > CLUSTER_TOL * sorted[i].abs().max(1.0);
        if split && i > start {
            let group = &sorted[start..i];
            out.push(EigenCluster {
                value: group.iter().sum::<f64>() / group.len() as f64,
                multiplicity: group.len(),
                spread: group[group.len() - 1] - group[0],
            });
            start = i;
        }
    }
    out
}

fn classify(d: usize, mut values: Vec<f64>, method: EigenMethod) -> EigReport {
    values.sort_by(f64::total_cmp);
    let top = 4.0 * d as f64;
    let mut below = Vec::new();
    let mut above = Vec::new();
    let mut flagged = Vec::new();
    for v in values {
        if v.abs() <= EDGE_TOL || (v - top).abs() <= EDGE_TOL {
            flagged.push(v);
        } else if v < 0.0 {
            below.push(v);
        } else if v > top {
            above.push(v);
        }
    }
    EigReport {
        d,
        below: cluster(&below),
        above: cluster(&above),
        flagged,
        method,
    }
}

/// All eigenvalues, ascending.
pub fn dense_spectrum(h: &BoxHamiltonian) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(h.matrix.to_dense()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Dirichlet Green function of `H0` on a box in the sine eigenbasis.
pub struct FreeBoxGreen {
    d: usize,
    side: usize,
    /// `phi[k * side + i]`, modes `k = 0..side` (wavenumber `k + 1`).
    phi: Vec<f64>,
    energies: Vec<f64>,
}

impl FreeBoxGreen {
    pub fn new(d: usize, side: usize) -> Self {
        let l = (side + 1) as f64;
        let mut phi = vec![0.0; side * side];
        let mut energies = vec![0.0; side];
        for k in 0..side {
            let q = PI * (k + 1) as f64 / l;
            energies[k] = 2.0 - 2.0 * q.cos();
            for i in 0..side {
                phi[k * side + i] = (2.0 / l).sqrt() * (q * (i + 1) as f64).sin();
            }
        }
        Self { d, side, phi, energies }
    }

    pub fn min_energy(&self) -> f64 {
        self.d as f64 * self.energies[0]
    }

    pub fn max_energy(&self) -> f64 {
        self.d as f64 * self.energies[self.side - 1]
    }

    /// `(H0 - E)^{-1}(p, q)` for axis indices `p`, `q` in `0..side`.
    pub fn entry(&self, e: f64, p: &[usize], q: &[usize]) -> f64 {
        let n = self.side;
        let prods: Vec<Vec<f64>> = (0..self.d)
            .map(|j| (0..n).map(|k| self.phi[k * n + p[j]] * self.phi[k * n + q[j]]).collect())
            .collect();
        fn rec(g: &FreeBoxGreen, prods: &[Vec<f64>], j: usize, coef: f64, energy: f64, e: f64) -> f64 {
            if j == prods.len() {
                return coef / (energy - e);
            }
            let mut s = 0.0;
            for k in 0..g.side {
                let c = prods[j][k];
                if c != 0.0 {
                    s += rec(g, prods, j + 1, coef * c, energy + g.energies[k], e);
                }
            }
            s
        }
        rec(self, &prods, 0, 1.0, 0.0, e)
    }
}

struct SchurCounter {
    green: FreeBoxGreen,
    sites: Vec<Vec<usize>>,
    w: Vec<f64>,
}

impl SchurCounter {
    fn new(h: &BoxHamiltonian) -> Self {
        let r = h.bx.r as i64;
        let (sites, w): (Vec<Vec<usize>>, Vec<f64>) = h
            .w_support()
            .into_iter()
            .map(|(x, v)| (x.iter().map(|&c| (c + r) as usize).collect(), v))
            .unzip();
        Self {
            green: FreeBoxGreen::new(h.bx.d, h.bx.side()),
            sites,
            w,
        }
    }

    fn schur_eigenvalues(&self, e: f64) -> Vec<f64> {
        let m = self.w.len();
        let mut s = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let g = self.green.entry(e, &self.sites[a], &self.sites[b]);
                let v = -g - if a == b { 1.0 / self.w[a] } else { 0.0 };
                s[(a, b)] = v;
                s[(b, a)] = v;
            }
        }
        SymmetricEigen::new(s).eigenvalues.iter().copied().collect()
    }

    /// Number of eigenvalues `< e`, for `e` below the free box spectrum.
    fn count_below(&self, e: f64) -> usize {
        let neg = self.schur_eigenvalues(e).iter().filter(|&&v| v < 0.0).count();
        neg - self.w.iter().filter(|&&v| v > 0.0).count()
    }

    /// Number of eigenvalues `> e`, for `e` above the free box spectrum.
    fn count_above(&self, e: f64) -> usize {
        let pos = self.schur_eigenvalues(e).iter().filter(|&&v| v > 0.0).count();
        pos - self.w.iter().filter(|&&v| v < 0.0).count()
    }
}

/// Splits `[lo, hi]` until every count jump is located to `tol`.
fn locate(count: &dyn Fn(f64) -> usize, lo: f64, hi: f64, c_lo: usize, c_hi: usize, tol: f64, out: &mut Vec<f64>) {
    if c_hi == c_lo {
        return;
    }
    if hi - lo <= tol {
        out.extend(std::iter::repeat(0.5 * (lo + hi)).take(c_hi - c_lo));
        return;
    }
    let mid = 0.5 * (lo + hi);
    let c_mid = count(mid);
    locate(count, lo, mid, c_lo, c_mid, tol, out);
    locate(count, mid, hi, c_mid, c_hi, tol, out);
}

fn schur_outside(h: &BoxHamiltonian) -> Vec<f64> {
    let sc = SchurCounter::new(h);
    if sc.w.is_empty() {
        return Vec::new();
    }
    let top = 4.0 * h.bx.d as f64;
    let wmin = sc.w.iter().copied().fold(0.0, f64::min);
    let wmax = sc.w.iter().copied().fold(0.0, f64::max);
    let mut values = Vec::new();
    let lo = wmin - 1.0;
    let below = |e: f64| sc.count_below(e);
    let edge = EDGE_TOL.min(sc.green.min_energy() / 2.0);
    locate(&below, lo, edge, 0, below(edge), EIG_TOL, &mut values);
    let hi = top + wmax + 1.0;
    // Count of eigenvalues below `e` among those above the band, as an
    // increasing function of `e`.
    let start = top - EDGE_TOL.min((top - sc.green.max_energy()) / 2.0);
    let total = sc.count_above(start);
    let rising = |e: f64| total - sc.count_above(e);
    locate(&rising, start, hi, 0, total, EIG_TOL, &mut values);
    values
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ritz pairs `(theta, residual)` at both ends of the spectrum from a
/// block Krylov space with full reorthogonalization.
pub fn block_lanczos(
    mat: &CsrMatrix,
    block: usize,
    max_dim: usize,
    lower: f64,
    upper: f64,
    res_tol: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let n = mat.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut aq: Vec<Vec<f64>> = Vec::new();
    let mut t: Vec<Vec<f64>> = Vec::new();
    let mut next: Vec<Vec<f64>> = (0..block).map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
    let mut stable = 0;
    let mut last_count = usize::MAX;
    loop {
        let mut added = 0;
        for mut v in next.drain(..) {
            let n0 = dot(&v, &v).sqrt();
            for _ in 0..2 {
                for b in &q {
                    let c = dot(b, &v);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nv = dot(&v, &v).sqrt();
            if nv <= 1e-10 * n0.max(1e-300) || q.len() >= n {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let mut av = vec![0.0; n];
            mat.apply(&v, &mut av);
            let k = q.len();
            let row: Vec<f64> = (0..=k).map(|j| if j < k { dot(&v, &aq[j]) } else { dot(&v, &av) }).collect();
            for (j, r) in t.iter_mut().enumerate() {
                r.push(row[j]);
            }
            t.push(row);
            q.push(v);
            aq.push(av);
            added += 1;
        }
        let m = q.len();
        let exhausted = added == 0 || m >= n;
        let tm = DMatrix::from_fn(m, m, |i, j| t[i][j]);
        let eig = SymmetricEigen::new(tm);
        let mut ritz = Vec::new();
        let mut all_converged = true;
        for (idx, &theta) in eig.eigenvalues.iter().enumerate() {
            if theta >= lower && theta <= upper {
                continue;
            }
            let s = eig.eigenvectors.column(idx);
            let mut r = vec![0.0; n];
            for j in 0..m {
                let c = s[j];
                for ((ri, a), b) in r.iter_mut().zip(&aq[j]).zip(&q[j]) {
                    *ri += c * (a - theta * b);
                }
            }
            let res = dot(&r, &r).sqrt();
            if res > res_tol {
                all_converged = false;
            }
            ritz.push((theta, res));
        }
        if all_converged && ritz.len() == last_count {
            stable += 1;
        } else {
            stable = 0;
        }
        last_count = ritz.len();
        if all_converged && (stable >= 3 || exhausted) {
            return Ok(ritz);
        }
        if exhausted || m >= max_dim {
            let worst = ritz.iter().map(|r| r.1).fold(0.0, f64::max);
            return Err(Error::NoConvergence {
                iterations: m,
                last: [ritz.len() as f64, worst],
            });
        }
        next = aq[m - added..].to_vec();
    }
}

pub fn eig_outside(h: &BoxHamiltonian) -> Result<EigReport> {
    let d = h.bx.d;
    if h.len() <= DENSE_MAX {
        return Ok(classify(d, dense_spectrum(h), EigenMethod::Dense));
    }
    if h.bc == BoundaryCondition::Dirichlet && h.is_free_plus_w() {
        return Ok(classify(d, schur_outside(h), EigenMethod::Schur));
    }
    let supp = h.w_support().len();
    let block = supp.max(2) + 2;
    let ritz = block_lanczos(&h.matrix, block, 1200.min(h.len()), 0.0, 4.0 * d as f64, EIG_TOL, 0x5eed)?;
    Ok(classify(d, ritz.into_iter().map(|r| r.0).collect(), EigenMethod::BlockLanczos))
}

/// Eigenvalue count near `mu` as a range `[low, high]`: `low` within
/// `tol`, `high` within `10 tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelDim {
    pub low: usize,
    pub high: usize,
}

impl KernelDim {
    pub fn is_ambiguous(&self) -> bool {
        self.low != self.high
    }
}

/// Default tolerance `1e-8 ||H||`.
pub fn default_kernel_tol(h: &BoxHamiltonian) -> f64 {
    1e-8 * h.norm_bound()
}

fn count_near(values: &[f64], mu: f64, tol: f64) -> KernelDim {
    let within = |t: f64| values.iter().filter(|&&v| (v - mu).abs() <= t).count();
    KernelDim {
        low: within(tol),
        high: within(10.0 * tol),
    }
}

/// Kernel dimension at `mu` outside the band from an existing report.
pub fn kernel_dim_outside(rep: &EigReport, mu: f64, tol: f64) -> KernelDim {
    let mut v = Vec::new();
    for c in rep.below.iter().chain(&rep.above) {
        v.extend(std::iter::repeat(c.value).take(c.multiplicity));
    }
    v.extend(&rep.flagged);
    count_near(&v, mu, tol)
}

pub fn kernel_dim(h: &BoxHamiltonian, mu: f64, tol: Option<f64>) -> Result<KernelDim> {
    let tol = tol.unwrap_or_else(|| default_kernel_tol(h));
    let top = 4.0 * h.bx.d as f64;
    if h.len() <= DENSE_MAX {
        Ok(count_near(&dense_spectrum(h), mu, tol))
    } else if mu < -10.0 * tol || mu > top + 10.0 * tol {
        Ok(kernel_dim_outside(&eig_outside(h)?, mu, tol))
    } else {
        Err(Error::NotComputable(format!(
            "kernel dimension at {mu} inside the band needs a dense box (n <= {DENSE_MAX})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeBox, Potential};
    use crate::spectral_box::hamiltonian::build_hamiltonian;

    #[test]
    fn point_mass_bound_state() {
        let bx = LatticeBox::new(1, 200);
        let h = build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &Potential::point_mass(vec![0], -1.0), 1.0, &Potential::table([])).unwrap();
        let rep = eig_outside(&h).unwrap();
        assert_eq!(rep.count_below(), 1);
        assert!((rep.below[0].value - (2.0 - 5f64.sqrt())).abs() < 1e-10);
        let k = kernel_dim(&h, 2.0 - 5f64.sqrt(), None).unwrap();
        assert_eq!((k.low, k.high), (1, 1));
        assert_eq!(kernel_dim(&h, -1.0, None).unwrap().low, 0);
    }

    #[test]
    fn free_box_has_nothing_outside() {
        let h = build_hamiltonian(&LatticeBox::new(2, 6), BoundaryCondition::Dirichlet, &Potential::table([]), 0.0, &Potential::table([])).unwrap();
        let rep = eig_outside(&h).unwrap();
        assert!(rep.list().is_empty() && rep.flagged.is_empty());
    }

    #[test]
    fn schur_counts_match_dense() {
        let bx = LatticeBox::new(2, 8);
        let w = Potential::table([
            (vec![0, 0], -5.0),
            (vec![1, 0], 6.5),
            (vec![-2, 3], -1.2),
            (vec![3, -1], 2.0),
            (vec![0, 1], -0.4),
        ]);
        let h = build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &Potential::table([]), 0.0, &w).unwrap();
        let dense = classify(2, dense_spectrum(&h), EigenMethod::Dense);
        let schur = classify(2, schur_outside(&h), EigenMethod::Schur);
        assert_eq!(dense.count_below(), schur.count_below());
        assert_eq!(dense.count_above(), schur.count_above());
        for (a, b) in dense.list().iter().zip(schur.list()) {
            assert!((a.0 - b.0).abs() < 1e-9, "{a:?} vs {b:?}");
            assert_eq!(a.1, b.1);
        }
        let g = FreeBoxGreen::new(2, bx.side());
        let hm = h.matrix.to_dense();
        let free = build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &Potential::table([]), 0.0, &Potential::table([])).unwrap();
        let inv = (free.matrix.to_dense() - DMatrix::identity(bx.len(), bx.len()) * -0.3).try_inverse().unwrap();
        let (p, q) = (bx.index(&[1, 2]).unwrap(), bx.index(&[-3, 0]).unwrap());
        assert!((inv[(p, q)] - g.entry(-0.3, &[9, 10], &[5, 8])).abs() < 1e-12);
        assert!(hm.nrows() == bx.len());
    }

    #[test]
    fn lanczos_matches_dense() {
        let bx = LatticeBox::new(2, 15);
        let v = Potential::power_decay(2.0, -3.0);
        let w = Potential::table([(vec![0, 0], 9.0)]);
        let h = build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &v, 1.0, &w).unwrap();
        let dense = classify(2, dense_spectrum(&h), EigenMethod::Dense);
        let ritz = block_lanczos(&h.matrix, 4, 900, 0.0, 8.0, EIG_TOL, 1).unwrap();
        let lz = classify(2, ritz.into_iter().map(|r| r.0).collect(), EigenMethod::BlockLanczos);
        assert!(dense.count_below() > 0 && dense.count_above() > 0);
        assert_eq!(dense.list().len(), lz.list().len());
        for (a, b) in dense.list().iter().zip(lz.list()) {
            assert!((a.0 - b.0).abs() < 1e-9, "{a:?} vs {b:?}");
            assert_eq!(a.1, b.1);
        }
    }
}
