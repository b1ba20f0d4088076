use crate::birman_schwinger::matrix::{BsOperator, NORM_MAX_ITER, NORM_TOL};
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::lattice::{ComplexEnergy, LatticeBox, Potential};
use crate::linalg::largest_singular_triplet;
use num_complex::Complex64;
use crate::resolvent::{kernel_table_refined, KernelTable, Quadrature, ResolutionRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Divergent,
    Inconclusive,
}

/// Decision thresholds applied per `mu` to the norms along the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictThresholds {
    pub bounded_ratio: f64,
    pub divergent_slope: f64,
    pub divergent_residual: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        Self {
            bounded_ratio: 2.0,
            divergent_slope: -0.2,
            divergent_residual: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub d: usize,
    pub radius: usize,
    pub grid_n: usize,
    /// Largest grid tried when the shifted error check asks for refinement.
    pub max_grid_n: usize,
    pub quadrature: Quadrature,
    pub rule: ResolutionRule,
    pub mu_grid: Vec<f64>,
    pub eps_ladder: Vec<f64>,
    pub thresholds: VerdictThresholds,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(d: usize, radius: usize) -> Self {
        Self {
            d,
            radius,
            grid_n: 256,
            max_grid_n: 512,
            quadrature: Quadrature::shifted(),
            rule: ResolutionRule::default(),
            mu_grid: default_mu_grid(d),
            eps_ladder: default_eps_ladder(),
            thresholds: VerdictThresholds::default(),
            seed: 0,
        }
    }
}

/// `{10^-1, 10^-1.5, ..., 10^-3}`.
pub fn default_eps_ladder() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

/// Integer energies from `-1` to `4d + 1`; every threshold `4k` is a node.
pub fn default_mu_grid(d: usize) -> Vec<f64> {
    (-1..=(4 * d as i64 + 1)).map(|m| m as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub eps: f64,
    pub norm: f64,
    pub kernel_error: f64,
    pub grid_n: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSummary {
    pub mu: f64,
    pub norms: Vec<f64>,
    pub ratio: f64,
    pub slope: f64,
    pub residual: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub d: usize,
    pub radius: usize,
    pub potential: Potential,
    pub mu_grid: Vec<f64>,
    pub eps_ladder: Vec<f64>,
    /// Row-major over `(mu, eps)`.
    pub points: Vec<SweepPoint>,
    pub running_sup: Vec<f64>,
    pub sup_norm: f64,
    pub per_mu: Vec<MuSummary>,
    pub verdict: Verdict,
    /// `sup_{|x| > R} |V| * max_z sum_x |G0(x; z)|`.
    pub tail_bound: f64,
}

impl SweepReport {
    /// CSV with columns `mu,eps,norm,slope`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mu,eps,norm,slope\n");
        for p in &self.points {
            let slope = self
                .per_mu
                .iter()
                .find(|m| m.mu == p.mu)
                .map_or(f64::NAN, |m| m.slope);
            s.push_str(&format!("{},{:e},{:.12e},{:.6}\n", p.mu, p.eps, p.norm, slope));
        }
        s
    }
}

pub fn classify(norms: &[f64], eps: &[f64], th: &VerdictThresholds) -> (f64, f64, f64, Verdict) {
    let max = norms.iter().copied().fold(f64::MIN, f64::max);
    let min = norms.iter().copied().fold(f64::MAX, f64::min);
    let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
    let (slope, residual) = if norms.len() >= 2 && min > 0.0 {
        let f = loglog_fit(eps, norms);
        (f.slope, f.residual)
    } else {
        (0.0, 0.0)
    };
    let verdict = if slope < th.divergent_slope && residual < th.divergent_residual {
        Verdict::Divergent
    } else if ratio <= th.bounded_ratio {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    (ratio, slope, residual, verdict)
}

fn table_for(cfg: &SweepConfig, z: ComplexEnergy) -> Result<KernelTable> {
    kernel_table_refined(cfg.d, 2 * cfg.radius, z, cfg.grid_n, cfg.max_grid_n, cfg.quadrature, &cfg.rule)
}

/// Sweeps several potentials over the same `z`-grid, computing each kernel
/// once.
pub fn bs_sup_sweep_many(potentials: &[Potential], cfg: &SweepConfig) -> Result<Vec<SweepReport>> {
    if cfg.mu_grid.is_empty() || cfg.eps_ladder.is_empty() {
        return Err(Error::InvalidInput("empty mu grid or eps ladder".into()));
    }
    if cfg.eps_ladder.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("eps ladder must be positive".into()));
    }
    let bx = LatticeBox::new(cfg.d, cfg.radius);
    let weights: Vec<Vec<f64>> = potentials.iter().map(|v| v.sqrt_abs(&bx)).collect();
    let zs: Vec<ComplexEnergy> = cfg
        .mu_grid
        .iter()
        .flat_map(|&mu| cfg.eps_ladder.iter().map(move |&eps| ComplexEnergy::new(mu, eps)))
        .collect();
    // Each mu walks its eps ladder in order, warm-starting every norm from
    // the previous top singular vector.
    let ne = cfg.eps_ladder.len();
    let rows: Vec<Result<Vec<(Vec<SweepPoint>, f64)>>> = zs
        .par_chunks(ne)
        .enumerate()
        .map(|(mi, chunk)| {
            let mut starts: Vec<Option<Vec<Complex64>>> = vec![None; weights.len()];
            let mut out = Vec::with_capacity(chunk.len());
            for (k, &z) in chunk.iter().enumerate() {
                let zi = mi * ne + k;
                let table = table_for(cfg, z)?;
                let l1 = table.l1_norm();
                let conv = BsOperator::convolver(&bx, &table)?;
                let mut pts = Vec::with_capacity(potentials.len());
                for (w, start) in weights.iter().zip(starts.iter_mut()) {
                    let (norm, iterations) = if w.iter().all(|&x| x == 0.0) {
                        (0.0, 0)
                    } else {
                        let op = BsOperator::new(bx, w.clone(), w.clone(), conv.clone());
                        let (est, v) =
                            largest_singular_triplet(&op, start.as_deref(), NORM_TOL, NORM_MAX_ITER, cfg.seed ^ zi as u64)?;
                        *start = Some(v);
                        (est.sigma, est.iterations)
                    };
                    pts.push(SweepPoint {
                        mu: z.mu,
                        eps: z.eps,
                        norm,
                        kernel_error: table.error_estimate,
                        grid_n: table.n,
                        iterations,
                    });
                }
                out.push((pts, l1));
            }
            Ok(out)
        })
        .collect();
    let mut by_pot: Vec<Vec<SweepPoint>> = vec![Vec::with_capacity(zs.len()); potentials.len()];
    let mut l1_max = 0.0f64;
    for row in rows {
        for (pts, l1) in row? {
            l1_max = l1_max.max(l1);
            for (k, p) in pts.into_iter().enumerate() {
                by_pot[k].push(p);
            }
        }
    }
    Ok(potentials
        .iter()
        .zip(by_pot)
        .map(|(v, points)| assemble(v.clone(), cfg, points, v.tail_bound(&bx) * l1_max))
        .collect())
}

pub fn bs_sup_sweep(v: &Potential, cfg: &SweepConfig) -> Result<SweepReport> {
    Ok(bs_sup_sweep_many(std::slice::from_ref(v), cfg)?.remove(0))
}

fn assemble(potential: Potential, cfg: &SweepConfig, points: Vec<SweepPoint>, tail_bound: f64) -> SweepReport {
    let ne = cfg.eps_ladder.len();
    let mut running = Vec::with_capacity(points.len());
    let mut sup = 0.0f64;
    for p in &points {
        sup = sup.max(p.norm);
        running.push(sup);
    }
    let per_mu: Vec<MuSummary> = cfg
        .mu_grid
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let norms: Vec<f64> = points[i * ne..(i + 1) * ne].iter().map(|p| p.norm).collect();
            let (ratio, slope, residual, verdict) = classify(&norms, &cfg.eps_ladder, &cfg.thresholds);
            MuSummary {
                mu,
                norms,
                ratio,
                slope,
                residual,
                verdict,
            }
        })
        .collect();
    let verdict = if per_mu.iter().any(|m| m.verdict == Verdict::Divergent) {
        Verdict::Divergent
    } else if per_mu.iter().all(|m| m.verdict == Verdict::Bounded) {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    SweepReport {
        d: cfg.d,
        radius: cfg.radius,
        potential,
        mu_grid: cfg.mu_grid.clone(),
        eps_ladder: cfg.eps_ladder.clone(),
        points,
        running_sup: running,
        sup_norm: sup,
        per_mu,
        verdict,
        tail_bound,
    }
}

/// `lambda* = 1 / sup_z ||K(z)||` for a bounded sweep.
pub fn weak_coupling_margin(sweep: &SweepReport) -> Result<f64> {
    match sweep.verdict {
        Verdict::Bounded if sweep.sup_norm > 0.0 => Ok(1.0 / sweep.sup_norm),
        Verdict::Bounded => Ok(f64::INFINITY),
        other => Err(Error::NoUniformMargin(format!(
            "sweep verdict is {other:?} (sup norm {:.4e})",
            sweep.sup_norm
        ))),
    }
}

pub fn weak_coupling_margin_from_sup(sup_norm: f64) -> f64 {
    if sup_norm > 0.0 {
        1.0 / sup_norm
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rules() {
        let eps = default_eps_ladder();
        let flat = [1.0, 1.1, 1.2, 1.25, 1.3];
        assert_eq!(classify(&flat, &eps, &VerdictThresholds::default()).3, Verdict::Bounded);
        let growing: Vec<f64> = eps.iter().map(|e| e.powf(-0.5)).collect();
        let (_, slope, res, v) = classify(&growing, &eps, &VerdictThresholds::default());
        assert!((slope + 0.5).abs() < 1e-12 && res < 1e-12);
        assert_eq!(v, Verdict::Divergent);
        let mild = [1.0, 1.5, 2.2, 2.4, 2.5];
        assert_eq!(classify(&mild, &eps, &VerdictThresholds::default()).3, Verdict::Inconclusive);
    }

    #[test]
    fn margin_is_reciprocal() {
        let cfg = SweepConfig {
            mu_grid: vec![-1.0],
            eps_ladder: vec![0.1, 0.01],
            grid_n: 64,
            ..SweepConfig::new(1, 3)
        };
        let mut rep = bs_sup_sweep(&Potential::power_decay(2.0, -1.0), &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Bounded);
        rep.sup_norm = 2.0;
        assert_eq!(weak_coupling_margin(&rep).unwrap(), 0.5);
    }

    #[test]
    fn one_dimensional_point_mass_has_no_margin() {
        let cfg = SweepConfig {
            mu_grid: vec![0.0],
            grid_n: 256,
            ..SweepConfig::new(1, 4)
        };
        let rep = bs_sup_sweep(&Potential::point_mass(vec![0], -1.0), &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Divergent);
        assert!(matches!(weak_coupling_margin(&rep), Err(Error::NoUniformMargin(_))));
    }
}
