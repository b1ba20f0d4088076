//! Multi-dimensional FFTs and the zero-padded box convolution used by the
//! Birman–Schwinger operators.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Row-major strides of a cube with side `l` in `d` dimensions.
fn strides(d: usize, l: usize) -> Vec<usize> {
    let mut s = vec![1usize; d];
    for j in (0..d.saturating_sub(1)).rev() {
        s[j] = s[j + 1] * l;
    }
    s
}

/// Lines gathered per strided transform call.
const BATCH: usize = 32;

/// Transforms `data` (a cube of side `l`) along `axis`, visiting only the
/// lines whose coordinates on axes before `axis` lie in `[0, lo)`.
/// Coordinates on later axes run over the full side. `buf` holds
/// `BATCH * l` values.
fn transform_axis(
    data: &mut [Complex64],
    d: usize,
    l: usize,
    axis: usize,
    lo: usize,
    fft: &Arc<dyn Fft<f64>>,
    buf: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let st = strides(d, l);
    let s = st[axis];
    // Enumerate line base offsets: prefix over axes < axis in [0, lo), suffix over axes > axis in [0, l).
    let prefix_count = lo.pow(axis as u32);
    let suffix_count = l.pow((d - axis - 1) as u32);
    for p in 0..prefix_count {
        let mut base_p = 0usize;
        let mut rem = p;
        for j in (0..axis).rev() {
            base_p += (rem % lo) * st[j];
            rem /= lo;
        }
        if axis == d - 1 {
            let line = &mut data[base_p..base_p + l];
            fft.process_with_scratch(line, scratch);
            continue;
        }
        // Suffix offsets are contiguous: process in batches of lines.
        let mut q = 0;
        while q < suffix_count {
            let k = BATCH.min(suffix_count - q);
            let base = base_p + q;
            let batch = &mut buf[..k * l];
            for i in 0..l {
                let row = &data[base + i * s..base + i * s + k];
                for (j, v) in row.iter().enumerate() {
                    batch[j * l + i] = *v;
                }
            }
            fft.process_with_scratch(batch, scratch);
            for i in 0..l {
                let row = &mut data[base + i * s..base + i * s + k];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = batch[j * l + i];
                }
            }
            q += k;
        }
    }
}

/// Full in-place FFT of a cube of side `l`; `inverse` uses `e^{+2 pi i}`
/// and is unnormalized.
pub fn fft_cube(data: &mut [Complex64], d: usize, l: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(l)
    } else {
        planner.plan_fft_forward(l)
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); BATCH * l];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..d {
        transform_axis(data, d, l, axis, l, &fft, &mut buf, &mut scratch);
    }
}

/// Convolution `g(y) = sum_x T(y - x) f(x)` on a box of side `b` with a
/// translation-invariant kernel `T` given on offsets `[-(b-1), b-1]^d`.
///
/// The kernel is embedded circularly in a cube of side `l >= 2b - 1`, so
/// the circular convolution is exact on the box.
pub struct BoxConvolver {
    d: usize,
    b: usize,
    l: usize,
    kernel_hat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl BoxConvolver {
    /// `kernel(m)` is evaluated for every offset `m` in `[-(b-1), b-1]^d`.
    pub fn new(d: usize, b: usize, kernel: impl Fn(&[i64]) -> Complex64) -> Self {
        let l = fft_len(2 * b - 1);
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(l);
        let inv = planner.plan_fft_inverse(l);
        let total = l.pow(d as u32);
        let mut t = vec![Complex64::new(0.0, 0.0); total];
        let span = 2 * b - 1;
        let st = strides(d, l);
        let mut m = vec![0i64; d];
        for idx in 0..span.pow(d as u32) {
            let mut rem = idx;
            let mut pos = 0usize;
            for j in (0..d).rev() {
                m[j] = (rem % span) as i64 - (b as i64 - 1);
                rem /= span;
                pos += (m[j].rem_euclid(l as i64) as usize) * st[j];
            }
            t[pos] = kernel(&m);
        }
        fft_cube(&mut t, d, l, false);
        let scale = 1.0 / total as f64;
        for v in t.iter_mut() {
            *v *= scale;
        }
        Self {
            d,
            b,
            l,
            kernel_hat: t,
            fwd,
            inv,
        }
    }

    pub fn box_len(&self) -> usize {
        self.b.pow(self.d as u32)
    }

    pub fn padded_side(&self) -> usize {
        self.l
    }

    /// Applies the convolution to `f` (box order) writing into `out`.
    pub fn apply(&self, f: &[Complex64], out: &mut [Complex64]) {
        let (d, b, l) = (self.d, self.b, self.l);
        assert_eq!(f.len(), self.box_len());
        let mut work = vec![Complex64::new(0.0, 0.0); l.pow(d as u32)];
        let st = strides(d, l);
        let bst = strides(d, b);
        for (i, &v) in f.iter().enumerate() {
            work[map_index(i, &bst, &st, b)] = v;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); BATCH * l];
        let mut scratch = vec![
            Complex64::new(0.0, 0.0);
            self.fwd
                .get_inplace_scratch_len()
                .max(self.inv.get_inplace_scratch_len())
        ];
        // Forward: last axis first, so untouched leading axes stay restricted to [0, b).
        for axis in (0..d).rev() {
            transform_axis(&mut work, d, l, axis, b, &self.fwd, &mut buf, &mut scratch);
        }
        for (w, k) in work.iter_mut().zip(&self.kernel_hat) {
            *w *= k;
        }
        // Inverse: leading axes first; afterwards only [0, b) is needed on them.
        for axis in 0..d {
            transform_axis(&mut work, d, l, axis, b, &self.inv, &mut buf, &mut scratch);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = work[map_index(i, &bst, &st, b)];
        }
    }
}

fn map_index(i: usize, bst: &[usize], st: &[usize], b: usize) -> usize {
    let mut pos = 0;
    for (j, &s) in bst.iter().enumerate() {
        pos += ((i / s) % b) * st[j];
    }
    pos
}

/// Smallest `n >= min` whose prime factors are all in {2, 3, 5}.
pub fn fft_len(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}
