//! Certificates for the bounds `dim Ker(H + W - mu) <= #{W != 0}`,
//! `#{eigenvalues <= 0} <= #{W < 0}` and `#{eigenvalues >= 4d} <= #{W > 0}`.

use crate::error::Result;
use crate::lattice::{BoundaryCondition, LatticeBox, Potential};
use crate::spectral_box::eigen::{default_kernel_tol, dense_spectrum, eig_outside, kernel_dim_outside, EigReport, DENSE_MAX};
use crate::spectral_box::hamiltonian::{build_hamiltonian, margin_limit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    /// `lambda V = 0`: the free operator has no eigenvalues.
    FreeOperator,
    /// `|lambda|` below a weak-coupling margin taken from a bounded sweep.
    WeakCoupling { lambda_star: f64 },
    NotEstablished,
}

impl Hypothesis {
    pub fn warning(&self) -> Option<String> {
        match self {
            Hypothesis::NotEstablished => Some("hypothesis of the counting bound not established".into()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateKind {
    KernelDim { mu: f64 },
    AtOrBelowZero,
    AtOrAboveTop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingCertificate {
    pub trial: usize,
    pub check: CertificateKind,
    pub multiplicity: usize,
    /// `[low, high]` when clusters make the count ambiguous.
    pub multiplicity_range: [usize; 2],
    pub bound: usize,
    pub pass: bool,
    pub hypothesis: Hypothesis,
    pub warning: Option<String>,
}

/// Hypothesis for coupling `lambda` given an optional margin `lambda*`.
pub fn hypothesis_for(v: &Potential, lambda: f64, lambda_star: Option<f64>) -> Hypothesis {
    let trivial = lambda == 0.0 || matches!(v.support(), Some(s) if s.is_empty());
    if trivial {
        Hypothesis::FreeOperator
    } else {
        match lambda_star {
            Some(ls) if lambda.abs() < ls => Hypothesis::WeakCoupling { lambda_star: ls },
            _ => Hypothesis::NotEstablished,
        }
    }
}

fn certificates(trial: usize, w: &Potential, rep: &EigReport, kernels: &[(f64, [usize; 2])], hyp: &Hypothesis) -> Vec<CountingCertificate> {
    let supp = w.support().unwrap_or_default();
    let nonzero = supp.len();
    let neg = supp.iter().filter(|(_, v)| *v < 0.0).count();
    let pos = supp.iter().filter(|(_, v)| *v > 0.0).count();
    let top = 4.0 * rep.d as f64;
    let flagged_low = rep.flagged.iter().filter(|&&v| v.abs() < 1.0).count();
    let flagged_high = rep.flagged.iter().filter(|&&v| (v - top).abs() < 1.0).count();
    let make = |check: CertificateKind, range: [usize; 2], bound: usize| CountingCertificate {
        trial,
        check,
        multiplicity: range[0],
        multiplicity_range: range,
        bound,
        pass: range[1] <= bound,
        hypothesis: hyp.clone(),
        warning: hyp.warning(),
    };
    let mut out = Vec::with_capacity(kernels.len() + 2);
    for &(mu, range) in kernels {
        out.push(make(CertificateKind::KernelDim { mu }, range, nonzero));
    }
    let b = rep.count_below();
    out.push(make(CertificateKind::AtOrBelowZero, [b, b + flagged_low], neg));
    let a = rep.count_above();
    out.push(make(CertificateKind::AtOrAboveTop, [a, a + flagged_high], pos));
    out
}

/// Certificates for one `W` on a Dirichlet box. Kernel dimensions are
/// sampled at every eigenvalue found outside the band and at `-1`, `4d+1`.
pub fn counting_check_one(
    bx: &LatticeBox,
    v: &Potential,
    lambda: f64,
    w: &Potential,
    hyp: &Hypothesis,
    trial: usize,
) -> Result<Vec<CountingCertificate>> {
    let h = build_hamiltonian(bx, BoundaryCondition::Dirichlet, v, lambda, w)?;
    let rep = eig_outside(&h)?;
    let top = 4.0 * bx.d as f64;
    let mut mus: Vec<f64> = rep.list().iter().map(|c| c.0).collect();
    mus.push(-1.0);
    mus.push(top + 1.0);
    let tol = default_kernel_tol(&h);
    let spectrum = (h.len() <= DENSE_MAX).then(|| dense_spectrum(&h));
    let kernels: Vec<(f64, [usize; 2])> = mus
        .into_iter()
        .map(|mu| {
            let k = match &spectrum {
                Some(all) => {
                    let within = |t: f64| all.iter().filter(|&&v| (v - mu).abs() <= t).count();
                    [within(tol), within(10.0 * tol)]
                }
                None => {
                    let k = kernel_dim_outside(&rep, mu, tol);
                    [k.low, k.high]
                }
            };
            (mu, k)
        })
        .collect();
    Ok(certificates(trial, w, &rep, &kernels, hyp))
}

pub fn counting_check(
    bx: &LatticeBox,
    v: &Potential,
    lambda: f64,
    ws: &[Potential],
    lambda_star: Option<f64>,
) -> Result<Vec<CountingCertificate>> {
    let hyp = hypothesis_for(v, lambda, lambda_star);
    let per: Vec<Result<Vec<CountingCertificate>>> = ws
        .par_iter()
        .enumerate()
        .map(|(i, w)| counting_check_one(bx, v, lambda, w, &hyp, i))
        .collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// Random table with `1..=max_support` distinct sites inside the margin of
/// a radius-`r` box and values uniform in `[-amplitude, amplitude]`.
pub fn random_w(d: usize, r: usize, max_support: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> Potential {
    let lim = margin_limit(r) as i64;
    let k = rng.gen_range(1..=max_support.max(1));
    let mut entries: Vec<(Vec<i64>, f64)> = Vec::with_capacity(k);
    while entries.len() < k {
        let x: Vec<i64> = (0..d).map(|_| rng.gen_range(-lim..=lim)).collect();
        if entries.iter().any(|(y, _)| *y == x) {
            continue;
        }
        let mut val = 0.0;
        while val == 0.0 {
            val = rng.gen_range(-amplitude..=amplitude);
        }
        entries.push((x, val));
    }
    Potential::table(entries)
}

pub fn random_ws(d: usize, r: usize, trials: usize, max_support: usize, amplitude: f64, seed: u64) -> Vec<Potential> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| random_w(d, r, max_support, amplitude, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> Potential {
        Potential::table([])
    }

    #[test]
    fn dipole_has_one_state_each_side() {
        let bx = LatticeBox::new(3, 5);
        let w = Potential::table([(vec![0, 0, 0], -5.0), (vec![1, 0, 0], 5.0)]);
        let certs = counting_check(&bx, &zero(), 0.0, &[w], None).unwrap();
        assert!(certs.iter().all(|c| c.pass));
        let below = certs.iter().find(|c| c.check == CertificateKind::AtOrBelowZero).unwrap();
        let above = certs.iter().find(|c| c.check == CertificateKind::AtOrAboveTop).unwrap();
        assert_eq!((below.multiplicity, below.bound), (1, 1));
        assert_eq!((above.multiplicity, above.bound), (1, 1));
    }

    #[test]
    fn zero_w_passes_trivially() {
        let bx = LatticeBox::new(2, 4);
        let certs = counting_check(&bx, &zero(), 0.0, &[zero()], None).unwrap();
        assert!(certs.iter().all(|c| c.pass && c.multiplicity == 0));
    }

    #[test]
    fn translation_invariance() {
        let bx = LatticeBox::new(2, 10);
        let a = Potential::table([(vec![0, 0], -4.0), (vec![1, 1], -4.0), (vec![2, 0], 7.0)]);
        let b = Potential::table([(vec![-3, 2], -4.0), (vec![-2, 3], -4.0), (vec![-1, 2], 7.0)]);
        let ca = counting_check(&bx, &zero(), 0.0, &[a], None).unwrap();
        let cb = counting_check(&bx, &zero(), 0.0, &[b], None).unwrap();
        let counts = |c: &[CountingCertificate]| -> Vec<usize> { c.iter().map(|x| x.multiplicity).collect() };
        assert_eq!(counts(&ca), counts(&cb));
    }

    #[test]
    fn hypothesis_paths() {
        let v = Potential::power_decay(2.0, -1.0);
        assert_eq!(hypothesis_for(&v, 0.0, None), Hypothesis::FreeOperator);
        assert_eq!(hypothesis_for(&v, 0.1, Some(0.5)), Hypothesis::WeakCoupling { lambda_star: 0.5 });
        assert!(hypothesis_for(&v, 0.9, Some(0.5)).warning().is_some());
    }
}
