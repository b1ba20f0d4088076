//! `(|V|^{1/2} eta, (H0 + mu^2)^{-1} |V|^{1/2} eta)` as `mu -> 0`.

use crate::error::{Error, Result};
use crate::fit::{line_fit, loglog_fit};
use crate::lattice::Potential;
use crate::resolvent::exact::green_exact;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const GREEN_TOL: f64 = 1e-12;
/// Largest last/first ratio classified as bounded.
pub const BOUNDED_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// `~ mu^{-k}`.
    Power,
    /// `~ ln(1/mu)`.
    Logarithmic,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSeries {
    pub d: usize,
    pub mu: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of `ln value` against `ln mu`.
    pub power_slope: f64,
    /// Slope of `value` against `ln(1/mu)`.
    pub log_slope: f64,
    /// `value(mu_last) / value(mu_first)`.
    pub ratio: f64,
    pub growth: Growth,
    pub monotone: bool,
}

pub fn threshold_divergence(d: usize, v: &Potential, eta: &[(Vec<i64>, f64)], mus: &[f64]) -> Result<ThresholdSeries> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if mus.len() < 2 || mus.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidInput("need at least two positive mu values".into()));
    }
    if eta.iter().any(|(x, _)| x.len() != d) {
        return Err(Error::InvalidInput(format!("eta sites must lie in Z^{d}")));
    }
    if eta.iter().any(|(_, e)| *e < 0.0) {
        return Err(Error::InvalidInput("eta must be nonnegative".into()));
    }
    if eta.iter().any(|(x, e)| *e != 0.0 && v.eval(x) > 0.0) {
        return Err(Error::InvalidInput("V must be nonpositive on the support of eta".into()));
    }
    let f: Vec<(Vec<i64>, f64)> = eta
        .iter()
        .map(|(x, e)| (x.clone(), v.eval(x).abs().sqrt() * e))
        .filter(|(_, g)| *g != 0.0)
        .collect();
    if f.is_empty() {
        return Err(Error::InvalidInput("eta must be positive somewhere on supp V".into()));
    }
    let values: Vec<f64> = mus
        .par_iter()
        .map(|&mu| {
            let z = Complex64::new(-mu * mu, 0.0);
            let mut s = 0.0;
            for (x, a) in &f {
                for (y, b) in &f {
                    let diff: Vec<i64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
                    s += a * b * green_exact(&diff, z, GREEN_TOL).re;
                }
            }
            s
        })
        .collect();
    let power_slope = loglog_fit(mus, &values).slope;
    let lx: Vec<f64> = mus.iter().map(|m| -m.ln()).collect();
    let log_slope = line_fit(&lx, &values).slope;
    let ratio = values[values.len() - 1] / values[0];
    let growth = if ratio <= BOUNDED_RATIO {
        Growth::Bounded
    } else if power_slope < -0.5 {
        Growth::Power
    } else {
        Growth::Logarithmic
    };
    let mut order: Vec<usize> = (0..mus.len()).collect();
    order.sort_by(|&i, &j| mus[j].total_cmp(&mus[i]));
    let monotone = order.windows(2).all(|w| values[w[1]] >= values[w[0]]);
    Ok(ThresholdSeries {
        d,
        mu: mus.to_vec(),
        values,
        power_slope,
        log_slope,
        ratio,
        growth,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(d: usize) -> (Potential, Vec<(Vec<i64>, f64)>) {
        (Potential::point_mass(vec![0; d], -1.0), vec![(vec![0; d], 1.0)])
    }

    #[test]
    fn one_dimensional_closed_form() {
        let (v, eta) = delta(1);
        let mus = [0.1, 0.01, 0.001];
        let s = threshold_divergence(1, &v, &eta, &mus).unwrap();
        for (&m, &val) in mus.iter().zip(&s.values) {
            let want = 1.0 / (m * m * (m * m + 4.0)).sqrt();
            assert!((val - want).abs() < 1e-12 * want);
        }
        assert_eq!(s.growth, Growth::Power);
        assert!(s.monotone);
    }

    #[test]
    fn positivity_overlap_required() {
        let v = Potential::point_mass(vec![0, 0], -1.0);
        assert!(threshold_divergence(2, &v, &[(vec![1, 0], 1.0)], &[0.1, 0.01]).is_err());
        let pos = Potential::point_mass(vec![0, 0], 1.0);
        assert!(threshold_divergence(2, &pos, &[(vec![0, 0], 1.0)], &[0.1, 0.01]).is_err());
    }
}
