//! Closed forms and independent quadratures for the free Green function.

use crate::lattice::symbol::symbol_1d;
use crate::quad::integrate;
use num_complex::Complex64;

/// Root of `t^2 - (2 - z) t + 1 = 0` inside the unit disk.
fn decay_root(z: Complex64) -> Complex64 {
    let b = Complex64::new(2.0, 0.0) - z;
    let disc = (z * (z - 4.0)).sqrt();
    let t1 = (b + disc) / 2.0;
    let t2 = (b - disc) / 2.0;
    if t1.norm() < t2.norm() {
        t1
    } else {
        t2
    }
}

/// One-dimensional lattice Green function `t^{|x|} / (1/t - t)`.
pub fn green_1d(x: i64, z: Complex64) -> Complex64 {
    let t = decay_root(z);
    t.powi(x.unsigned_abs() as i32) / (t.inv() - t)
}

/// `G0(0; z)` in one dimension, `1/sqrt(z(z-4))` on the principal branch
/// continued from `z < 0`.
pub fn green_1d_origin(z: Complex64) -> Complex64 {
    green_1d(0, z)
}

/// `G0(x; z)` for `d >= 1` by reducing the last axis to the closed form and
/// integrating the remaining axes adaptively.
pub fn green_exact(x: &[i64], z: Complex64, tol: f64) -> Complex64 {
    let d = x.len();
    assert!(d >= 1);
    if d == 1 {
        return green_1d(x[0], z);
    }
    fn nest(x: &[i64], z: Complex64, tol: f64) -> Complex64 {
        let (head, rest) = (x[0], &x[1..]);
        let f = |xi: f64| -> Complex64 {
            let shifted = z - symbol_1d(xi);
            let inner = if rest.len() == 1 {
                green_1d(rest[0], shifted)
            } else {
                nest(rest, shifted, tol)
            };
            inner * (2.0 * std::f64::consts::PI * head as f64 * xi).cos()
        };
        // Even integrand: twice the integral over [0, 1/2], split at 1/4.
        let a = integrate(&f, 0.0, 0.25, tol, tol);
        let b = integrate(&f, 0.25, 0.5, tol, tol);
        (a + b) * 2.0
    }
    nest(x, z, tol)
}
