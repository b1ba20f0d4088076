use crate::error::{Error, Result};
use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A linear map `C^cols -> C^rows` with its adjoint.
pub trait LinOp: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinOp for DMatrix<Complex64> {
    fn rows(&self) -> usize {
        self.nrows()
    }
    fn cols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = (0..self.nrows()).map(|i| self[(i, j)].conj() * x[i]).sum();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularEstimate {
    pub sigma: f64,
    pub iterations: usize,
    /// Residual `||A^H u - sigma v||` of the returned Ritz triplet.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // Two passes of classical Gram–Schmidt.
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

fn top_svd(alpha: &[f64], beta: &[f64]) -> (f64, f64, Vec<f64>) {
    let k = alpha.len();
    let mut b = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        b[(i, i)] = alpha[i];
        if i + 1 < k {
            b[(i, i + 1)] = beta[i];
        }
    }
    let svd = SVD::new(b, true, true);
    let (imax, &s) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let second = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != imax)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let p_last = u[(k - 1, imax)];
    let q: Vec<f64> = (0..k).map(|i| vt[(imax, i)]).collect();
    (s, second, vec![p_last].into_iter().chain(q).collect())
}

fn ritz(q: &[f64], basis: &[Vec<Complex64>], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (qi, b) in q.iter().zip(basis) {
        for (x, y) in out.iter_mut().zip(b) {
            *x += *qi * y;
        }
    }
    out
}

/// Largest singular value by Golub–Kahan–Lanczos bidiagonalization with full
/// reorthogonalization and explicit restarts.
pub fn largest_singular_value(
    op: &dyn LinOp,
    rel_tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SingularEstimate> {
    largest_singular_triplet(op, None, rel_tol, max_iter, seed).map(|r| r.0)
}

/// As [`largest_singular_value`], optionally started from `start`, and also
/// returning the top right Ritz vector.
pub fn largest_singular_triplet(
    op: &dyn LinOp,
    start: Option<&[Complex64]>,
    rel_tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(SingularEstimate, Vec<Complex64>)> {
    let (m, n) = (op.rows(), op.cols());
    if m == 0 || n == 0 {
        return Ok((
            SingularEstimate {
                sigma: 0.0,
                iterations: 0,
                residual: 0.0,
            },
            vec![Complex64::new(0.0, 0.0); n],
        ));
    }
    let max_basis = 48.min(m.min(n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<Complex64> = match start {
        Some(v) if v.len() == n && norm(v) > 0.0 => v.to_vec(),
        _ => (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect(),
    };
    let mut total = 0usize;
    let mut history = [f64::NAN, f64::NAN];
    loop {
        let s0 = norm(&start);
        start.iter_mut().for_each(|v| *v /= s0);
        let mut vs: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut us: Vec<Vec<Complex64>> = Vec::new();
        let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
        let mut u = vec![Complex64::new(0.0, 0.0); m];
        op.apply(&vs[0], &mut u);
        loop {
            if let Some(prev) = us.last() {
                let b = *beta.last().unwrap();
                for (ui, pi) in u.iter_mut().zip(prev) {
                    *ui -= b * pi;
                }
            }
            orthogonalize(&mut u, &us);
            let a = norm(&u);
            alpha.push(a);
            total += 1;
            if a == 0.0 && alpha.len() == 1 {
                return Ok((
                    SingularEstimate {
                        sigma: 0.0,
                        iterations: total,
                        residual: 0.0,
                    },
                    vs.swap_remove(0),
                ));
            }
            if a > 0.0 {
                u.iter_mut().for_each(|v| *v /= a);
            }
            us.push(u.clone());
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            op.apply_adjoint(&u, &mut v);
            let last_v = vs.last().unwrap();
            for (vi, qi) in v.iter_mut().zip(last_v) {
                *vi -= a * qi;
            }
            orthogonalize(&mut v, &vs);
            let b = norm(&v);
            let (sigma, second, vecs) = top_svd(&alpha, &beta);
            let residual = b * vecs[0].abs();
            history = [history[1], sigma];
            let gap = (sigma - second).max(1e-3 * sigma);
            let converged = residual <= rel_tol * sigma
                || (alpha.len() >= 2 && residual * residual <= rel_tol * sigma * gap)
                || b <= 1e-14 * sigma.max(1e-300);
            if converged {
                return Ok((
                    SingularEstimate {
                        sigma,
                        iterations: total,
                        residual,
                    },
                    ritz(&vecs[1..], &vs, n),
                ));
            }
            if total >= max_iter {
                return Err(Error::NoConvergence {
                    iterations: total,
                    last: history,
                });
            }
            if alpha.len() >= max_basis {
                // Restart from the current top right Ritz vector.
                start = ritz(&vecs[1..], &vs, n);
                break;
            }
            beta.push(b);
            v.iter_mut().for_each(|x| *x /= b);
            vs.push(v);
            u = vec![Complex64::new(0.0, 0.0); m];
            op.apply(vs.last().unwrap(), &mut u);
        }
    }
}

/// Largest singular value of a dense matrix.
pub fn dense_largest_singular_value(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}
