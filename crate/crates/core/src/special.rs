use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `J_0(x), ..., J_nmax(x)` for `x >= 0` by Miller's backward recurrence,
/// normalized with `J_0 + 2 sum_k J_2k = 1`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return out;
    }
    let top = nmax.max(x.ceil() as usize);
    let mut start = top + 30 + (8.0 * (top as f64).cbrt()) as usize + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut vals = vec![0.0; start + 2];
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for n in (0..=start).rev() {
        vals[n] = j;
        if n % 2 == 0 {
            norm += if n == 0 { j } else { 2.0 * j };
        }
        if n == 0 {
            break;
        }
        let jm1 = 2.0 * n as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            for v in vals[n..].iter_mut() {
                *v *= 1e-250;
            }
            jp1 *= 1e-250;
            j *= 1e-250;
            norm *= 1e-250;
        }
    }
    vals.truncate(nmax + 1);
    vals.iter().map(|v| v / norm).collect()
}

/// The cutoff `chi(x) = exp(1 - 1/(1 - (4x)^2))` for `|x| < 1/4`, zero
/// outside, together with a cached table of its inverse Fourier transform
/// `chi_check(k) = int chi(x) e^{2 pi i k x} dx` (real and even).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpProfile {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self::new(256.0, 1.0 / 64.0)
    }
}

static SHARED: std::sync::OnceLock<BumpProfile> = std::sync::OnceLock::new();

impl BumpProfile {
    pub const SUPPORT: f64 = 0.25;

    /// Process-wide default table.
    pub fn shared() -> &'static BumpProfile {
        SHARED.get_or_init(BumpProfile::default)
    }

    /// Caches the transform on `[0, k_max]` with spacing `step`.
    pub fn new(k_max: f64, step: f64) -> Self {
        let n = (k_max / step).ceil() as usize + 1;
        let (values, slopes): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| Self::transform_direct(i as f64 * step))
            .unzip();
        Self {
            step,
            values,
            slopes,
        }
    }

    #[inline]
    pub fn eval(x: f64) -> f64 {
        let u = 4.0 * x;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    /// Transform and its derivative by the trapezoid rule, which is
    /// spectrally accurate for a smooth compactly supported integrand.
    pub fn transform_direct(k: f64) -> (f64, f64) {
        let m = 2048usize;
        let h = Self::SUPPORT / m as f64;
        let (mut v, mut dv) = (0.0, 0.0);
        for i in 1..m {
            let x = i as f64 * h;
            let c = Self::eval(x);
            let ph = 2.0 * PI * k * x;
            v += c * ph.cos();
            dv -= c * 2.0 * PI * x * ph.sin();
        }
        // Even extension; the x = 0 node carries half weight on each side.
        (h * (2.0 * v + 1.0), 2.0 * h * dv)
    }

    pub fn k_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Cached `chi_check(k)` by cubic Hermite interpolation; zero beyond
    /// the table.
    pub fn transform(&self, k: f64) -> f64 {
        let t = k.abs() / self.step;
        let i = t.floor() as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let s = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }

    /// Smallest tabulated `k` beyond which `|chi_check| < tol * chi_check(0)`.
    pub fn effective_cutoff(&self, tol: f64) -> f64 {
        let thresh = tol * self.values[0].abs();
        let last = self
            .values
            .iter()
            .rposition(|v| v.abs() >= thresh)
            .unwrap_or(0);
        ((last + 1) as f64 * self.step).min(self.k_max())
    }
}
