//! Free resolvent kernels `G0(x; z) = int e^{2 pi i x.xi} / (h0(xi) - z) dxi`
//! by separable torus quadrature.
//!
//! `Quadrature::Plain` is the Riemann sum on the grid `k / N` (the inverse
//! DFT of the sampled multiplier). `Quadrature::Shifted` deforms every axis
//! into the lower half-plane, `zeta = xi - i lambda 4 pi sin(2 pi xi)`, which
//! keeps `Im h0(zeta) <= 0` and so never crosses the pole for `Im z > 0`;
//! by Cauchy's theorem the integral is unchanged while the integrand becomes
//! smooth on the scale of the grid.

use crate::error::{Error, Result};
use crate::lattice::{ComplexEnergy, LatticeBox, LatticeFn, TorusGrid};
use crate::resolvent::exact::green_1d;
use matrixmultiply::CGemmOption;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Plain,
    Shifted {
        /// Deformation strength; `None` picks `1.9 / (8 pi^2 max(n_max, 8))`.
        #[serde(default)]
        lambda: Option<f64>,
    },
}

impl Quadrature {
    pub fn shifted() -> Self {
        Quadrature::Shifted { lambda: None }
    }

    pub fn lambda(&self, n_max: usize) -> f64 {
        match self {
            Quadrature::Plain => 0.0,
            Quadrature::Shifted { lambda: Some(l) } => *l,
            Quadrature::Shifted { lambda: None } => 1.9 / (8.0 * PI * PI * n_max.max(8) as f64),
        }
    }
}

/// Minimal grid size for a spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionRule {
    pub c_res: f64,
    /// Relative bound on the `N` versus `N/2` difference accepted in
    /// shifted mode.
    pub shifted_tol: f64,
}

impl Default for ResolutionRule {
    fn default() -> Self {
        Self {
            c_res: 32.0,
            shifted_tol: 2e-2,
        }
    }
}

impl ResolutionRule {
    /// A-priori minimal `N`: `c / sqrt|z - E|` for `mu` outside the open
    /// band (nearest edge `E`), `c / |eps|` inside it. In shifted mode only
    /// the offsets must be resolvable; accuracy is then checked a posteriori.
    pub fn required_n(&self, d: usize, z: ComplexEnergy, n_max: usize, quad: Quadrature) -> (usize, String) {
        let offsets = 2 * n_max + 2;
        match quad {
            Quadrature::Plain => {
                let top = 4.0 * d as f64;
                if z.mu <= 0.0 || z.mu >= top {
                    let edge = if z.mu <= 0.0 { 0.0 } else { top };
                    let dist = (z.z() - edge).norm();
                    let n = (self.c_res / dist.sqrt()).ceil() as usize;
                    (n.max(offsets), format!("outside band, |z - {edge}| = {dist:.3e}"))
                } else {
                    let n = (self.c_res / z.eps.abs()).ceil() as usize;
                    (n.max(offsets), format!("inside band, eps = {:.3e}", z.eps))
                }
            }
            Quadrature::Shifted { .. } => (offsets, format!("offsets up to {n_max}")),
        }
    }
}

/// `G0(n; z)` for `n in [0, n_max]^d`; the kernel is even in every
/// coordinate so negative offsets use absolute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub d: usize,
    pub n_max: usize,
    pub z: ComplexEnergy,
    pub n: usize,
    pub quadrature: Quadrature,
    pub values: Vec<Complex64>,
    /// `max_x |G_N(x) - G_{N/2}(x)|`.
    pub error_estimate: f64,
}

impl KernelTable {
    pub fn get(&self, x: &[i64]) -> Complex64 {
        let m = self.n_max + 1;
        let mut idx = 0usize;
        for &c in x {
            let a = c.unsigned_abs() as usize;
            assert!(a <= self.n_max, "offset {x:?} beyond kernel table radius {}", self.n_max);
            idx = idx * m + a;
        }
        self.values[idx]
    }

    pub fn origin(&self) -> Complex64 {
        self.values[0]
    }

    /// `sum_x |G0(x)|` over all signed offsets in `[-n_max, n_max]^d`.
    pub fn l1_norm(&self) -> f64 {
        let m = self.n_max + 1;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut rem = i;
                let mut mult = 1.0;
                for _ in 0..self.d {
                    if rem % m != 0 {
                        mult *= 2.0;
                    }
                    rem /= m;
                }
                v.norm() * mult
            })
            .sum()
    }

    pub fn conj(&self) -> Self {
        Self {
            z: self.z.conj(),
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..self.clone()
        }
    }
}

/// Half-grid basis `cos(2 pi n zeta_k) zeta'(xi_k) w_k / N` and per-axis
/// symbol `h(zeta_k)`, `k = 0..=N/2`, with `w = 1, 2, ..., 2, 1`.
fn axis_basis(n_grid: usize, n_max: usize, lambda: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let h = n_grid / 2 + 1;
    let mut phi = vec![Complex64::new(0.0, 0.0); (n_max + 1) * h];
    let mut sym = vec![Complex64::new(0.0, 0.0); h];
    for k in 0..h {
        let xi = k as f64 / n_grid as f64;
        let s2 = (2.0 * PI * xi).sin();
        let c2 = (2.0 * PI * xi).cos();
        let zeta = Complex64::new(xi, -lambda * 4.0 * PI * s2);
        let jac = Complex64::new(1.0, -lambda * 8.0 * PI * PI * c2);
        let w = if k == 0 || k == h - 1 { 1.0 } else { 2.0 };
        let sp = (zeta * PI).sin();
        sym[k] = sp * sp * 4.0;
        for n in 0..=n_max {
            phi[n * h + k] = (zeta * (2.0 * PI * n as f64)).cos() * jac * (w / n_grid as f64);
        }
    }
    (phi, sym)
}

/// `out[a, m] = sum_k t[a, k] phi[m, k]`, then transposed to `[m, a]`.
fn contract_last(t: &[Complex64], rows: usize, h: usize, phi: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m * rows];
    // Write directly in transposed layout via strides: out[m_idx * rows + a].
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            rows,
            h,
            m,
            [1.0, 0.0],
            t.as_ptr() as *const [f64; 2],
            h as isize,
            1,
            phi.as_ptr() as *const [f64; 2],
            1,
            h as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            rows as isize,
        );
    }
    out
}

/// Separable quadrature on the half grid of size `n_grid` (every
/// `stride`-th node of the base half grid).
fn separable_sum(d: usize, n_grid: usize, n_max: usize, z: Complex64, lambda: f64) -> Vec<Complex64> {
    let h = n_grid / 2 + 1;
    let (phi, sym) = axis_basis(n_grid, n_max, lambda);
    let total = h.pow(d as u32);
    let mut t = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; d];
    for (i, slot) in t.iter_mut().enumerate() {
        let mut rem = i;
        for j in (0..d).rev() {
            idx[j] = rem % h;
            rem /= h;
        }
        let s: Complex64 = idx.iter().map(|&k| sym[k]).sum();
        *slot = (s - z).inv();
    }
    let m = n_max + 1;
    let mut rows = total / h;
    for _ in 0..d {
        t = contract_last(&t, rows, h, &phi, m);
        // The contracted axis is now leading; the next axis to contract is
        // the trailing one of the remaining `rows` block.
        rows = rows / h * m;
    }
    t
}

/// Kernel table over `[0, n_max]^d` with an `N` versus `N/2` error estimate.
pub fn kernel_table(
    d: usize,
    n_max: usize,
    z: ComplexEnergy,
    grid: &TorusGrid,
    quad: Quadrature,
    rule: &ResolutionRule,
) -> Result<KernelTable> {
    if grid.dim() != d {
        return Err(Error::InvalidInput(format!(
            "grid dimension {} does not match d = {d}",
            grid.dim()
        )));
    }
    z.check_resolvable(d)?;
    let n = grid.points_per_axis();
    let (required, reason) = rule.required_n(d, z, n_max, quad);
    if n < required {
        return Err(Error::Resolution {
            n,
            required: required.next_power_of_two(),
            reason,
        });
    }
    let half_nodes = ((n / 2 + 1) as u128).pow(d as u32);
    if half_nodes > 1u128 << 28 {
        return Err(Error::Budget {
            nodes: half_nodes,
            budget: 1 << 28,
        });
    }
    let lambda = quad.lambda(n_max);
    let upper = z.eps >= 0.0;
    let zu = if upper { z.z() } else { z.z().conj() };
    let mut values = separable_sum(d, n, n_max, zu, lambda);
    let coarse = separable_sum(d, n / 2, n_max, zu, lambda);
    let error_estimate = values
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if !upper {
        values.iter_mut().for_each(|v| *v = v.conj());
    }
    if let Quadrature::Shifted { .. } = quad {
        let scale = values[0].norm();
        if error_estimate > rule.shifted_tol * scale {
            return Err(Error::Resolution {
                n,
                required: 2 * n,
                reason: format!(
                    "shifted quadrature N/2 difference {error_estimate:.3e} exceeds {:.1e} x |G(0)|",
                    rule.shifted_tol
                ),
            });
        }
    }
    Ok(KernelTable {
        d,
        n_max,
        z,
        n,
        quadrature: quad,
        values,
        error_estimate,
    })
}

/// `kernel_table` starting at `start_n` and doubling the grid, up to
/// `max_n`, while the resolution check asks for more nodes.
pub fn kernel_table_refined(
    d: usize,
    n_max: usize,
    z: ComplexEnergy,
    start_n: usize,
    max_n: usize,
    quad: Quadrature,
    rule: &ResolutionRule,
) -> Result<KernelTable> {
    let mut n = start_n;
    loop {
        let grid = TorusGrid::new(d, n)?;
        match kernel_table(d, n_max, z, &grid, quad, rule) {
            Err(Error::Resolution { required, .. }) if required <= max_n && required > n => {
                n = required.next_power_of_two();
            }
            other => return other,
        }
    }
}

/// One-dimensional table from the closed form; `n` records no grid.
pub fn kernel_table_1d_exact(n_max: usize, z: ComplexEnergy) -> Result<KernelTable> {
    z.check_resolvable(1)?;
    Ok(KernelTable {
        d: 1,
        n_max,
        z,
        n: 0,
        quadrature: Quadrature::Plain,
        values: (0..=n_max as i64).map(|x| green_1d(x, z.z())).collect(),
        error_estimate: 0.0,
    })
}

/// Plain kernel by a full inverse FFT of the sampled multiplier.
pub fn kernel_table_fft(d: usize, n_max: usize, z: ComplexEnergy, grid: &TorusGrid) -> Result<Vec<Complex64>> {
    z.check_resolvable(d)?;
    let n = grid.points_per_axis();
    if 2 * n_max >= n {
        return Err(Error::InvalidInput(format!("offsets up to {n_max} need N > {}", 2 * n_max)));
    }
    let sym = grid.axis_symbol();
    let total = n.pow(d as u32);
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; d];
    for (i, slot) in data.iter_mut().enumerate() {
        let mut rem = i;
        for j in (0..d).rev() {
            idx[j] = rem % n;
            rem /= n;
        }
        let s: f64 = idx.iter().map(|&k| sym[k]).sum();
        *slot = (Complex64::new(s, 0.0) - z.z()).inv();
    }
    crate::fft::fft_cube(&mut data, d, n, true);
    let scale = 1.0 / total as f64;
    let m = n_max + 1;
    let mut out = Vec::with_capacity(m.pow(d as u32));
    for i in 0..m.pow(d as u32) {
        let mut rem = i;
        let mut p = 0;
        let mut digits = vec![0usize; d];
        for j in (0..d).rev() {
            digits[j] = rem % m;
            rem /= m;
        }
        for &dg in &digits {
            p = p * n + dg;
        }
        out.push(data[p] * scale);
    }
    Ok(out)
}

/// Values of `G0(x; z)` on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventKernel {
    pub z: ComplexEnergy,
    pub grid: TorusGrid,
    pub values: LatticeFn,
    pub error_estimate: f64,
}

impl ResolventKernel {
    /// CSV with columns `x_1..x_d,re,im,err`.
    pub fn to_csv(&self) -> String {
        let base = self.values.to_csv();
        let mut out = String::with_capacity(base.len() + 16 * self.values.values.len());
        for (i, line) in base.lines().enumerate() {
            out.push_str(line);
            if i == 0 {
                out.push_str(",err\n");
            } else {
                out.push_str(&format!(",{:e}\n", self.error_estimate));
            }
        }
        out
    }
}

pub fn free_kernel(bx: &LatticeBox, z: ComplexEnergy, grid: &TorusGrid, quad: Quadrature) -> Result<ResolventKernel> {
    let table = kernel_table(bx.d, bx.r, z, grid, quad, &ResolutionRule::default())?;
    let values = LatticeFn::from_fn(*bx, |x| table.get(x));
    Ok(ResolventKernel {
        z,
        grid: *grid,
        values,
        error_estimate: table.error_estimate,
    })
}
