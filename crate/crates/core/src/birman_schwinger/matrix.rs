use crate::error::{Error, Result};
use crate::fft::BoxConvolver;
use crate::lattice::{ComplexEnergy, LatticeBox, Potential, TorusGrid};
use crate::linalg::{dense_largest_singular_value, largest_singular_value, LinOp, SingularEstimate};
use crate::resolvent::{kernel_table, KernelTable, Quadrature, ResolutionRule};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Relative tolerance of the singular-value iteration.
pub const NORM_TOL: f64 = 1e-8;
pub const NORM_MAX_ITER: usize = 3000;

/// Dense Birman–Schwinger matrix `w_l(x) G0(x - y; z) w_r(y)` on the sites
/// where either weight is nonzero.
#[derive(Debug)]
pub struct BSMatrix {
    pub z: ComplexEnergy,
    pub sites: Vec<Vec<i64>>,
    pub entries: DMatrix<Complex64>,
    /// Set when `w_l = w_r` and `z` is real below the spectrum.
    pub hermitian: bool,
    norm: OnceLock<f64>,
}

impl BSMatrix {
    pub fn new(z: ComplexEnergy, sites: Vec<Vec<i64>>, entries: DMatrix<Complex64>, hermitian: bool) -> Self {
        Self {
            z,
            sites,
            entries,
            hermitian,
            norm: OnceLock::new(),
        }
    }

    pub fn norm(&self) -> f64 {
        *self
            .norm
            .get_or_init(|| dense_largest_singular_value(&self.entries))
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Assembles the dense matrix for `|V|^{1/2} (H0 - z)^{-1} |V|^{1/2}`
/// restricted to the support of `V` inside the box.
pub fn bs_matrix(
    v: &Potential,
    z: ComplexEnergy,
    bx: &LatticeBox,
    grid: &TorusGrid,
    quad: Quadrature,
) -> Result<BSMatrix> {
    let w = v.sqrt_abs(bx);
    let sites: Vec<Vec<i64>> = bx
        .sites()
        .zip(&w)
        .filter(|(_, &wi)| wi != 0.0)
        .map(|(x, _)| x)
        .collect();
    let weights: Vec<f64> = w.iter().copied().filter(|&wi| wi != 0.0).collect();
    if sites.is_empty() {
        return Ok(BSMatrix::new(z, sites, DMatrix::zeros(0, 0), true));
    }
    let n_max = sites
        .iter()
        .flat_map(|a| sites.iter().map(move |b| a.iter().zip(b).map(|(p, q)| (p - q).unsigned_abs()).max().unwrap_or(0)))
        .max()
        .unwrap_or(0) as usize;
    let table = kernel_table(bx.d, n_max, z, grid, quad, &ResolutionRule::default())?;
    Ok(dense_from_table(z, sites, &weights, &weights, &table))
}

pub fn dense_from_table(
    z: ComplexEnergy,
    sites: Vec<Vec<i64>>,
    wl: &[f64],
    wr: &[f64],
    table: &KernelTable,
) -> BSMatrix {
    let n = sites.len();
    let mut diff = vec![0i64; table.d];
    let entries = DMatrix::from_fn(n, n, |i, j| {
        for (k, slot) in diff.iter_mut().enumerate() {
            *slot = sites[i][k] - sites[j][k];
        }
        table.get(&diff) * (wl[i] * wr[j])
    });
    let hermitian = wl == wr && z.eps == 0.0 && z.mu < 0.0;
    BSMatrix::new(z, sites, entries, hermitian)
}

pub fn bs_norm(k: &BSMatrix) -> f64 {
    k.norm()
}

/// Matrix-free `w_l G0(z) w_r` on a full box via zero-padded FFT convolution.
pub struct BsOperator {
    pub bx: LatticeBox,
    wl: Vec<f64>,
    wr: Vec<f64>,
    conv: std::sync::Arc<BoxConvolver>,
}

impl BsOperator {
    /// `table` must cover offsets up to `2R`.
    pub fn convolver(bx: &LatticeBox, table: &KernelTable) -> Result<std::sync::Arc<BoxConvolver>> {
        if table.n_max < 2 * bx.r || table.d != bx.d {
            return Err(Error::InvalidInput(format!(
                "kernel table radius {} does not cover box offsets up to {}",
                table.n_max,
                2 * bx.r
            )));
        }
        Ok(std::sync::Arc::new(BoxConvolver::new(bx.d, bx.side(), |m| table.get(m))))
    }

    pub fn new(bx: LatticeBox, wl: Vec<f64>, wr: Vec<f64>, conv: std::sync::Arc<BoxConvolver>) -> Self {
        assert_eq!(wl.len(), bx.len());
        assert_eq!(wr.len(), bx.len());
        Self { bx, wl, wr, conv }
    }

    pub fn norm(&self, seed: u64) -> Result<SingularEstimate> {
        largest_singular_value(self, NORM_TOL, NORM_MAX_ITER, seed)
    }
}

impl LinOp for BsOperator {
    fn rows(&self) -> usize {
        self.bx.len()
    }
    fn cols(&self) -> usize {
        self.bx.len()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let f: Vec<Complex64> = x.iter().zip(&self.wr).map(|(v, w)| v * w).collect();
        self.conv.apply(&f, y);
        y.iter_mut().zip(&self.wl).for_each(|(v, w)| *v *= w);
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        // The kernel is complex symmetric, so C^H = conj C conj.
        let f: Vec<Complex64> = x.iter().zip(&self.wl).map(|(v, w)| (v * w).conj()).collect();
        self.conv.apply(&f, y);
        y.iter_mut().zip(&self.wr).for_each(|(v, w)| *v = v.conj() * w);
    }
}
