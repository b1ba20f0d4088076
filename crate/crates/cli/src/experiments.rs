//! The eleven batch experiments. Each has a parameter block (the `params`
//! object of a config file), a flag set that overrides it, a verdict
//! vocabulary for `--assert`, and a fixed set of CSV/JSON artifacts.

use crate::config::CliError;
use crate::output::Table;
use clap::Args;
use latbs::birman_schwinger::{bs_sup_sweep, default_eps_ladder, default_mu_grid, weak_coupling_margin, SweepConfig, SweepReport, Verdict, VerdictThresholds};
use latbs::counterexamples::{
    flatband, flatband_kernel, flatband_weighted_blowup, knapp_family, sobolev_blowup_probe, threshold_divergence, ultra_surface_form, BlowupConfig,
    Growth, KnappConfig, SobolevConfig, UltraProfile,
};
use latbs::dynamics::{continuum_dispersive, dispersive_fit, strichartz_delta, ContinuumConfig, DispersiveConfig};
use latbs::fit::{logspace, loglog_fit};
use latbs::lattice::{BoundaryCondition, LatticeBox, Potential};
use latbs::resolvent::{boundary_value_continuity, HolderClass, Quadrature, ResolutionRule, WeightedNormConfig};
use latbs::spectral_box::{build_hamiltonian, counting_check, eig_outside, random_ws};
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub struct Outcome {
    pub verdict: &'static str,
    pub report: Value,
    pub tables: Vec<Table>,
    /// Extra artifacts written verbatim.
    pub extra: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

pub trait Experiment {
    const NAME: &'static str;
    /// Result the experiment probes.
    const RESULT: &'static str;
    const VERDICTS: &'static [&'static str];
    type Params: Default + Serialize + DeserializeOwned + JsonSchema;

    /// Fills dimension-dependent defaults.
    fn resolve(_p: &mut Self::Params) {}

    fn run(p: &Self::Params, seed: u64) -> Result<Outcome, CliError>;
}

pub struct CatalogEntry {
    pub name: &'static str,
    pub result: &'static str,
    pub verdicts: &'static [&'static str],
}

macro_rules! entry {
    ($t:ty) => {
        CatalogEntry {
            name: <$t>::NAME,
            result: <$t>::RESULT,
            verdicts: <$t>::VERDICTS,
        }
    };
}

pub const CATALOG: [CatalogEntry; 11] = [
    entry!(BsSweep),
    entry!(EigCount),
    entry!(WeakCoupling),
    entry!(DispersiveFitCmd),
    entry!(Strichartz),
    entry!(Knapp),
    entry!(Flatband),
    entry!(ThresholdDiv),
    entry!(HolderBv),
    entry!(UltraProbe),
    entry!(ContinuumDispersive),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SiteValue {
    pub site: Vec<i64>,
    pub value: f64,
}

fn parse_potential(s: &str, d: usize) -> Result<Potential, CliError> {
    Potential::parse_shorthand(s)
        .map(|v| v.resolve_dim(d))
        .map_err(|e| CliError::Usage(format!("schema violation at `params.potential`: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Run(e.to_string()))
}

fn usage(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("schema violation at `params.{field}`: {msg}"))
}

fn nonzero_dim(d: usize) -> Result<(), CliError> {
    if d == 0 {
        Err(usage("d", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------- bs-sweep

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub d: usize,
    /// `power:<exp>[:<amp>]`, `delta:<value>`, `aniso:<p>` or `flatband`.
    pub potential: String,
    pub radius: usize,
    pub grid_n: usize,
    pub max_grid_n: usize,
    /// Real parts of `z`; the integers `-1..=4d+1` when absent.
    pub mu: Option<Vec<f64>>,
    /// Imaginary parts of `z`; `10^-1, 10^-1.5, ..., 10^-3` when absent.
    pub eps: Option<Vec<f64>>,
    pub bounded_ratio: f64,
    pub divergent_slope: f64,
    pub divergent_residual: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        let th = VerdictThresholds::default();
        Self {
            d: 3,
            potential: "power:-2".into(),
            radius: 40,
            grid_n: 256,
            max_grid_n: 512,
            mu: None,
            eps: None,
            bounded_ratio: th.bounded_ratio,
            divergent_slope: th.divergent_slope,
            divergent_residual: th.divergent_residual,
        }
    }
}

impl SweepParams {
    fn resolve(&mut self) {
        self.mu.get_or_insert_with(|| default_mu_grid(self.d));
        self.eps.get_or_insert_with(default_eps_ladder);
    }

    fn config(&self, seed: u64) -> Result<SweepConfig, CliError> {
        nonzero_dim(self.d)?;
        let mut cfg = SweepConfig::new(self.d, self.radius);
        cfg.grid_n = self.grid_n;
        cfg.max_grid_n = self.max_grid_n;
        cfg.mu_grid = self.mu.clone().unwrap_or_else(|| default_mu_grid(self.d));
        cfg.eps_ladder = self.eps.clone().unwrap_or_else(default_eps_ladder);
        cfg.thresholds = VerdictThresholds {
            bounded_ratio: self.bounded_ratio,
            divergent_slope: self.divergent_slope,
            divergent_residual: self.divergent_residual,
        };
        cfg.seed = seed;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct SweepFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub max_grid_n: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub bounded_ratio: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub divergent_slope: Option<f64>,
    #[arg(long)]
    pub divergent_residual: Option<f64>,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Bounded => "bounded",
        Verdict::Divergent => "divergent",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn sweep_tables(name: &str, rep: &SweepReport) -> Vec<Table> {
    let mut pts = Table::new(format!("{name}.csv"), &["mu", "eps", "norm", "slope", "kernel_error", "grid_n"]);
    for p in &rep.points {
        let slope = rep.per_mu.iter().find(|m| m.mu == p.mu).map_or(f64::NAN, |m| m.slope);
        pts.push([p.mu.to_string(), p.eps.to_string(), p.norm.to_string(), slope.to_string(), p.kernel_error.to_string(), p.grid_n.to_string()]);
    }
    let mut per = Table::new(format!("{name}-verdicts.csv"), &["mu", "ratio", "slope", "residual", "verdict"]);
    for m in &rep.per_mu {
        per.push([m.mu.to_string(), m.ratio.to_string(), m.slope.to_string(), m.residual.to_string(), verdict_name(m.verdict).to_string()]);
    }
    vec![pts, per]
}

pub struct BsSweep;

impl Experiment for BsSweep {
    const NAME: &'static str = "bs-sweep";
    const RESULT: &'static str = "uniform Birman-Schwinger bound for (1+|x|)^-2 decay; failure for slower decay";
    const VERDICTS: &'static [&'static str] = &["bounded", "divergent", "inconclusive"];
    type Params = SweepParams;

    fn resolve(p: &mut SweepParams) {
        p.resolve();
    }

    fn run(p: &SweepParams, seed: u64) -> Result<Outcome, CliError> {
        let cfg = p.config(seed)?;
        let v = parse_potential(&p.potential, p.d)?;
        let rep = bs_sup_sweep(&v, &cfg)?;
        Ok(Outcome {
            verdict: verdict_name(rep.verdict),
            summary: format!("sup norm {:.6e}, tail bound {:.3e}", rep.sup_norm, rep.tail_bound),
            tables: sweep_tables(Self::NAME, &rep),
            report: to_value(&rep)?,
            extra: Vec::new(),
        })
    }
}

// --------------------------------------------------------------- eig-count

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct EigCountParams {
    pub d: usize,
    pub radius: usize,
    /// Coupling of `potential`.
    pub lambda: f64,
    pub potential: String,
    /// Weak-coupling margin of `potential`, if known.
    pub lambda_star: Option<f64>,
    /// Explicit `W`; random tables are drawn when empty.
    pub w: Vec<SiteValue>,
    pub trials: usize,
    pub max_support: usize,
    pub amplitude: f64,
}

impl Default for EigCountParams {
    fn default() -> Self {
        Self {
            d: 3,
            radius: 15,
            lambda: 0.0,
            potential: "power:-2".into(),
            lambda_star: None,
            w: Vec::new(),
            trials: 100,
            max_support: 5,
            amplitude: 8.0,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct EigCountFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long)]
    pub lambda_star: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub max_support: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
}

pub struct EigCount;

impl Experiment for EigCount {
    const NAME: &'static str = "eig-count";
    const RESULT: &'static str = "eigenvalue counting bounds for H + W with finitely supported W";
    const VERDICTS: &'static [&'static str] = &["pass", "fail"];
    type Params = EigCountParams;

    fn run(p: &EigCountParams, seed: u64) -> Result<Outcome, CliError> {
        nonzero_dim(p.d)?;
        let bx = LatticeBox::new(p.d, p.radius);
        let v = parse_potential(&p.potential, p.d)?;
        let ws = if p.w.is_empty() {
            random_ws(p.d, p.radius, p.trials, p.max_support, p.amplitude, seed)
        } else {
            vec![Potential::table(p.w.iter().map(|e| (e.site.clone(), e.value)))]
        };
        let certs = counting_check(&bx, &v, p.lambda, &ws, p.lambda_star)?;
        let failing = certs.iter().filter(|c| !c.pass).count();
        let mut table = Table::new(format!("{}.csv", Self::NAME), &["trial", "check", "mu", "multiplicity", "multiplicity_high", "bound", "pass"]);
        let mut lines = Vec::new();
        for c in &certs {
            let (check, mu) = match c.check {
                latbs::spectral_box::CertificateKind::KernelDim { mu } => ("kernel_dim", mu.to_string()),
                latbs::spectral_box::CertificateKind::AtOrBelowZero => ("at_or_below_zero", String::new()),
                latbs::spectral_box::CertificateKind::AtOrAboveTop => ("at_or_above_top", String::new()),
            };
            table.push([
                c.trial.to_string(),
                check.to_string(),
                mu,
                c.multiplicity_range[0].to_string(),
                c.multiplicity_range[1].to_string(),
                c.bound.to_string(),
                c.pass.to_string(),
            ]);
            lines.extend(serde_json::to_vec(c).map_err(|e| CliError::Run(e.to_string()))?);
            lines.push(b'\n');
        }
        let report = json!({
            "trials": ws.len(),
            "certificates": certs.len(),
            "failing": failing,
            "potentials": ws,
        });
        Ok(Outcome {
            verdict: if failing == 0 { "pass" } else { "fail" },
            summary: format!("{} certificates over {} trials, {failing} failing", certs.len(), ws.len()),
            report,
            tables: vec![table],
            extra: vec![(format!("{}.jsonl", Self::NAME), lines)],
        })
    }
}

// ----------------------------------------------------------- weak-coupling

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct WeakCouplingParams {
    pub d: usize,
    pub potential: String,
    pub radius: usize,
    pub grid_n: usize,
    pub max_grid_n: usize,
    pub mu: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub bounded_ratio: f64,
    pub divergent_slope: f64,
    pub divergent_residual: f64,
    /// Radius of the Dirichlet box searched for eigenvalues at `lambda*/2`.
    pub check_radius: usize,
}

impl Default for WeakCouplingParams {
    fn default() -> Self {
        let s = SweepParams::default();
        Self {
            d: s.d,
            potential: "power:-2:-1".into(),
            radius: s.radius,
            grid_n: s.grid_n,
            max_grid_n: s.max_grid_n,
            mu: None,
            eps: None,
            bounded_ratio: s.bounded_ratio,
            divergent_slope: s.divergent_slope,
            divergent_residual: s.divergent_residual,
            check_radius: 10,
        }
    }
}

impl WeakCouplingParams {
    fn sweep(&self) -> SweepParams {
        SweepParams {
            d: self.d,
            potential: self.potential.clone(),
            radius: self.radius,
            grid_n: self.grid_n,
            max_grid_n: self.max_grid_n,
            mu: self.mu.clone(),
            eps: self.eps.clone(),
            bounded_ratio: self.bounded_ratio,
            divergent_slope: self.divergent_slope,
            divergent_residual: self.divergent_residual,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct WeakCouplingFlags {
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepFlags,
    #[arg(long)]
    pub check_radius: Option<usize>,
}

pub struct WeakCoupling;

impl Experiment for WeakCoupling {
    const NAME: &'static str = "weak-coupling";
    const RESULT: &'static str = "weak-coupling margin lambda* = 1/sup||K(z)|| and absence of eigenvalues below it";
    const VERDICTS: &'static [&'static str] = &["consistent", "inconsistent", "no-margin"];
    type Params = WeakCouplingParams;

    fn resolve(p: &mut WeakCouplingParams) {
        p.mu.get_or_insert_with(|| default_mu_grid(p.d));
        p.eps.get_or_insert_with(default_eps_ladder);
    }

    fn run(p: &WeakCouplingParams, seed: u64) -> Result<Outcome, CliError> {
        let cfg = p.sweep().config(seed)?;
        let v = parse_potential(&p.potential, p.d)?;
        let rep = bs_sup_sweep(&v, &cfg)?;
        let mut tables = sweep_tables(Self::NAME, &rep);
        let (verdict, report, summary) = match weak_coupling_margin(&rep) {
            Err(e) => (
                "no-margin",
                json!({ "sweep": to_value(&rep)?, "lambda_star": Value::Null, "reason": e.to_string() }),
                format!("no margin: {e}"),
            ),
            Ok(lambda_star) => {
                let lambda = lambda_star / 2.0;
                let bx = LatticeBox::new(p.d, p.check_radius);
                let h = build_hamiltonian(&bx, BoundaryCondition::Dirichlet, &v, lambda, &Potential::table(Vec::new()))?;
                let eig = eig_outside(&h)?;
                let outside = eig.count_below() + eig.count_above();
                let mut t = Table::new(format!("{}-eigenvalues.csv", Self::NAME), &["eigenvalue", "multiplicity"]);
                for (e, m) in eig.list() {
                    t.push([e.to_string(), m.to_string()]);
                }
                tables.push(t);
                (
                    if outside == 0 { "consistent" } else { "inconsistent" },
                    json!({
                        "sweep": to_value(&rep)?,
                        "lambda_star": lambda_star,
                        "check": { "lambda": lambda, "radius": p.check_radius, "eigenvalues_outside": outside, "report": to_value(&eig)? },
                    }),
                    format!("lambda* = {lambda_star:.6e}; {outside} eigenvalues outside the band at lambda*/2"),
                )
            }
        };
        Ok(Outcome {
            verdict,
            report,
            tables,
            extra: Vec::new(),
            summary,
        })
    }
}

// ---------------------------------------------------------- dispersive-fit

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct DispersiveParams {
    pub d: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub radius: Option<usize>,
    /// Allowed distance of the slope from `-d/3`; 0.05 for `d = 1`, 0.07 otherwise.
    pub tolerance: Option<f64>,
}

impl Default for DispersiveParams {
    fn default() -> Self {
        let c = DispersiveConfig::default();
        Self {
            d: 1,
            t_min: c.t_min,
            t_max: c.t_max,
            samples: c.samples,
            radius: None,
            tolerance: None,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct DispersiveFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

pub struct DispersiveFitCmd;

impl Experiment for DispersiveFitCmd {
    const NAME: &'static str = "dispersive-fit";
    const RESULT: &'static str = "dispersive decay ||e^{-itH0}||_{1->inf} ~ <t>^{-d/3}";
    const VERDICTS: &'static [&'static str] = &["match", "mismatch", "inconclusive"];
    type Params = DispersiveParams;

    fn resolve(p: &mut DispersiveParams) {
        p.tolerance.get_or_insert(if p.d == 1 { 0.05 } else { 0.07 });
    }

    fn run(p: &DispersiveParams, _seed: u64) -> Result<Outcome, CliError> {
        let cfg = DispersiveConfig {
            t_min: p.t_min,
            t_max: p.t_max,
            samples: p.samples,
            radius: p.radius,
        };
        let fit = dispersive_fit(p.d, &cfg)?;
        let target = -(p.d as f64) / 3.0;
        let tol = p.tolerance.unwrap_or(0.07);
        let verdict = if fit.inconclusive {
            "inconclusive"
        } else if (fit.slope - target).abs() < tol {
            "match"
        } else {
            "mismatch"
        };
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["t", "sup_norm", "l2_norm"]);
        for ((t_, s), l) in fit.run.times.iter().zip(&fit.run.sup_norms).zip(&fit.run.l2_norms) {
            t.push([t_, s, l]);
        }
        Ok(Outcome {
            verdict,
            summary: format!("slope {:.4} (target {target:.4}), residual {:.3e}", fit.slope, fit.residual),
            report: to_value(&fit)?,
            tables: vec![t],
            extra: Vec::new(),
        })
    }
}

// -------------------------------------------------------------- strichartz

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzParams {
    pub d: usize,
    /// `T`; the norm is also computed on `[0, 2T]`.
    pub t_max: f64,
    /// Largest admissible `value(2T) / value(T)`.
    pub doubling_tolerance: f64,
}

impl Default for StrichartzParams {
    fn default() -> Self {
        Self {
            d: 4,
            t_max: 8.0,
            doubling_tolerance: 1.05,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct StrichartzFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub doubling_tolerance: Option<f64>,
}

pub struct Strichartz;

impl Experiment for Strichartz {
    const NAME: &'static str = "strichartz";
    const RESULT: &'static str = "Strichartz bound ||e^{-itH0} delta_0||_{L^2_t l^{2d/(d-3),2}} for d >= 4";
    const VERDICTS: &'static [&'static str] = &["stable", "growing"];
    type Params = StrichartzParams;

    fn run(p: &StrichartzParams, _seed: u64) -> Result<Outcome, CliError> {
        let a = strichartz_delta(p.d, p.t_max)?;
        let b = strichartz_delta(p.d, 2.0 * p.t_max)?;
        let ratio = b.value / a.value;
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["t", "lorentz_norm"]);
        for (s, v) in &b.samples {
            t.push([s, v]);
        }
        Ok(Outcome {
            verdict: if ratio <= p.doubling_tolerance { "stable" } else { "growing" },
            summary: format!("value(T) {:.6e}, value(2T) {:.6e}, ratio {ratio:.5}", a.value, b.value),
            report: json!({ "t": to_value(&a)?, "two_t": to_value(&b)?, "doubling_ratio": ratio }),
            tables: vec![t],
            extra: Vec::new(),
        })
    }
}

// ------------------------------------------------------------------- knapp

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct KnappParams {
    pub d: usize,
    pub p: f64,
    /// Aperture constant; selected automatically when absent.
    pub a: Option<f64>,
    pub eps: Vec<f64>,
    /// Surface mesh points per free axis.
    pub mesh: usize,
}

impl Default for KnappParams {
    fn default() -> Self {
        let c = KnappConfig::default();
        Self {
            d: c.d,
            p: c.p,
            a: c.a,
            eps: c.eps,
            mesh: c.mesh,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct KnappFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub mesh: Option<usize>,
}

pub struct Knapp;

impl Experiment for Knapp {
    const NAME: &'static str = "knapp";
    const RESULT: &'static str = "Knapp-type family against the anisotropic weak-l^p weight";
    const VERDICTS: &'static [&'static str] = &["unbounded", "bounded"];
    type Params = KnappParams;

    fn run(p: &KnappParams, _seed: u64) -> Result<Outcome, CliError> {
        let rep = knapp_family(&KnappConfig {
            d: p.d,
            p: p.p,
            a: p.a,
            eps: p.eps.clone(),
            mesh: p.mesh,
        })?;
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["eps", "q", "q_error", "m", "tube_sum", "tube_ok"]);
        for x in &rep.data {
            t.push([x.eps.to_string(), x.q.to_string(), x.q_error.to_string(), x.m.to_string(), x.tube_sum.to_string(), x.tube_ok.to_string()]);
        }
        Ok(Outcome {
            verdict: if rep.ratio_unbounded { "unbounded" } else { "bounded" },
            summary: format!(
                "a = {:.4}, slopes Q {:.4} M {:.4} ratio {:.4}, tube inclusion {}",
                rep.a, rep.slope_q, rep.slope_m, rep.slope_ratio, rep.tube_inclusion
            ),
            report: to_value(&rep)?,
            tables: vec![t],
            extra: Vec::new(),
        })
    }
}

// ---------------------------------------------------------------- flatband

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct FlatbandParams {
    /// Support radius of the cutoff around `(1/4, 1/4)`.
    pub rho: f64,
    /// Kernel table on `[-range, range]^2`.
    pub range: i64,
    /// `|J(t)| / |J(0)|` must stay below `tail_tolerance` for `t >= tail_from`.
    pub tail_from: usize,
    pub tail_tolerance: f64,
    /// Relative bound on the spread of `|I(s, 0)|`.
    pub flat_tolerance: f64,
    pub s_max: i64,
    pub t_max: i64,
    pub s_fit_min: i64,
    /// Nonnegative finitely supported `psi` on `Z^2`; `delta_0` when empty.
    pub psi: Vec<SiteValue>,
}

impl Default for FlatbandParams {
    fn default() -> Self {
        let b = BlowupConfig::default();
        Self {
            rho: flatband::DEFAULT_RHO,
            range: 50,
            tail_from: 20,
            tail_tolerance: 1e-4,
            flat_tolerance: 1e-10,
            s_max: b.s_max,
            t_max: b.t_max,
            s_fit_min: b.s_fit_min,
            psi: Vec::new(),
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct FlatbandFlags {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub range: Option<i64>,
    #[arg(long)]
    pub tail_from: Option<usize>,
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
    #[arg(long)]
    pub flat_tolerance: Option<f64>,
    #[arg(long)]
    pub s_max: Option<i64>,
    #[arg(long)]
    pub t_max: Option<i64>,
    #[arg(long)]
    pub s_fit_min: Option<i64>,
}

pub struct Flatband;

impl Experiment for Flatband {
    const NAME: &'static str = "flatband";
    const RESULT: &'static str = "flat-band direction of {h0 = 4} in d = 2: no decay along x1 + x2";
    const VERDICTS: &'static [&'static str] = &["flat", "not-flat"];
    type Params = FlatbandParams;

    fn run(p: &FlatbandParams, _seed: u64) -> Result<Outcome, CliError> {
        let table = flatband_kernel(p.rho, p.range)?;
        let psi: Vec<(Vec<i64>, f64)> = if p.psi.is_empty() {
            vec![(vec![0, 0], 1.0)]
        } else {
            p.psi.iter().map(|e| (e.site.clone(), e.value)).collect()
        };
        let blow = flatband_weighted_blowup(
            &psi,
            &BlowupConfig {
                rho: p.rho,
                s_max: p.s_max,
                t_max: p.t_max,
                s_fit_min: p.s_fit_min,
            },
        )?;
        let j0 = table.j_abs[0];
        let tail = table.j_abs.iter().skip(p.tail_from).cloned().fold(0.0, f64::max) / j0;
        let spread = table.diagonal_std / table.diagonal_mean;
        let flat = spread < p.flat_tolerance && tail < p.tail_tolerance;
        let mut kernel = Table::new(format!("{}-kernel.csv", Self::NAME), &["x1", "x2", "re", "im", "abs"]);
        for e in &table.entries {
            kernel.push([e.x1.to_string(), e.x2.to_string(), e.re.to_string(), e.im.to_string(), e.abs.to_string()]);
        }
        let mut profile = Table::new(format!("{}-profile.csv", Self::NAME), &["s", "abs_v"]);
        for (s, v) in &blow.profile {
            profile.push([s.to_string(), v.to_string()]);
        }
        let mut sums = Table::new(format!("{}-partial-sums.csv", Self::NAME), &["s_max", "partial_sum"]);
        for (s, v) in &blow.partial_sums {
            sums.push([s.to_string(), v.to_string()]);
        }
        Ok(Outcome {
            verdict: if flat { "flat" } else { "not-flat" },
            summary: format!(
                "diagonal spread {spread:.3e}, tail {tail:.3e}, profile slope {:.4}, log slope {:.4e}",
                blow.profile_slope, blow.log_slope
            ),
            report: json!({
                "diagonal_relative_spread": spread,
                "tail_ratio": tail,
                "kernel": to_value(&table)?,
                "blowup": to_value(&blow)?,
            }),
            tables: vec![kernel, profile, sums],
            extra: Vec::new(),
        })
    }
}

// ----------------------------------------------------------- threshold-div

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdParams {
    pub d: usize,
    /// Nonpositive potential, e.g. `delta:-1`.
    pub potential: String,
    /// Nonnegative `eta`; `delta_0` when empty.
    pub eta: Vec<SiteValue>,
    /// `z = -mu^2`.
    pub mu: Vec<f64>,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            d: 2,
            potential: "delta:-1".into(),
            eta: Vec::new(),
            mu: logspace(1e-2, 1e-5, 7),
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct ThresholdFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
}

pub struct ThresholdDiv;

impl Experiment for ThresholdDiv {
    const NAME: &'static str = "threshold-div";
    const RESULT: &'static str = "divergence of (|V|^1/2 eta, (H0 + mu^2)^-1 |V|^1/2 eta) as mu -> 0 in d = 1, 2";
    const VERDICTS: &'static [&'static str] = &["divergent", "bounded"];
    type Params = ThresholdParams;

    fn run(p: &ThresholdParams, _seed: u64) -> Result<Outcome, CliError> {
        nonzero_dim(p.d)?;
        let v = parse_potential(&p.potential, p.d)?;
        let eta: Vec<(Vec<i64>, f64)> = if p.eta.is_empty() {
            vec![(vec![0; p.d], 1.0)]
        } else {
            p.eta.iter().map(|e| (e.site.clone(), e.value)).collect()
        };
        let s = threshold_divergence(p.d, &v, &eta, &p.mu)?;
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["mu", "value"]);
        for (m, v) in s.mu.iter().zip(&s.values) {
            t.push([m, v]);
        }
        Ok(Outcome {
            verdict: if s.growth == Growth::Bounded { "bounded" } else { "divergent" },
            summary: format!("growth {:?}, log slope {:.6}, power slope {:.4}, ratio {:.4}", s.growth, s.log_slope, s.power_slope, s.ratio),
            report: to_value(&s)?,
            tables: vec![t],
            extra: Vec::new(),
        })
    }
}

// --------------------------------------------------------------- holder-bv

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct HolderParams {
    pub d: usize,
    /// Weight exponent of `<x>^-s` on both sides.
    pub s: f64,
    /// Real part of `z`; `2d` when absent.
    pub mu: Option<f64>,
    /// Non-increasing imaginary parts.
    pub eps: Vec<f64>,
    pub radius: usize,
    pub grid_n: usize,
    pub max_grid_n: usize,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self {
            d: 3,
            s: 1.5,
            mu: None,
            eps: default_eps_ladder(),
            radius: 20,
            grid_n: 256,
            max_grid_n: 512,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct HolderFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub max_grid_n: Option<usize>,
}

pub struct HolderBv;

impl Experiment for HolderBv {
    const NAME: &'static str = "holder-bv";
    const RESULT: &'static str = "Hoelder continuity of <x>^-s R0(mu + i eps) <x>^-s up to the real axis";
    const VERDICTS: &'static [&'static str] = &["cauchy", "divergent", "inconclusive"];
    type Params = HolderParams;

    fn resolve(p: &mut HolderParams) {
        p.mu.get_or_insert(2.0 * p.d as f64);
    }

    fn run(p: &HolderParams, seed: u64) -> Result<Outcome, CliError> {
        nonzero_dim(p.d)?;
        let cfg = WeightedNormConfig {
            grid_n: p.grid_n,
            max_grid_n: p.max_grid_n,
            quadrature: Quadrature::shifted(),
            rule: ResolutionRule::default(),
            seed,
        };
        let bx = LatticeBox::new(p.d, p.radius);
        let mu = p.mu.unwrap_or(2.0 * p.d as f64);
        let rep = boundary_value_continuity(p.s, mu, &p.eps, &bx, &cfg)?;
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["eps", "eps_next", "m"]);
        for (e, m) in rep.eps_pairs.iter().zip(&rep.m_values) {
            t.push([e[0], e[1], *m]);
        }
        let verdict = match rep.classification {
            HolderClass::Cauchy => "cauchy",
            HolderClass::Divergent => "divergent",
            HolderClass::Inconclusive => "inconclusive",
        };
        Ok(Outcome {
            verdict,
            summary: format!("fitted exponent {:.4}, tail estimate {:?}", rep.fitted_exponent, rep.tail_estimate),
            report: to_value(&rep)?,
            tables: vec![t],
            extra: Vec::new(),
        })
    }
}

// ------------------------------------------------------------- ultra-probe

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct UltraParams {
    pub d: usize,
    /// `singular`, `bounded` or `zero`.
    pub profile: String,
    /// Outer radius of the singular profile.
    pub radius: f64,
    /// Annulus of the bounded profile.
    pub inner: f64,
    pub outer: f64,
    pub eps: Vec<f64>,
    /// Also run the Sobolev refinement table.
    pub sobolev: bool,
    pub sobolev_s: Vec<f64>,
    pub sobolev_grids: Vec<usize>,
    pub sobolev_period: f64,
    /// Smallest last/first ratio classified as divergent.
    pub divergent_ratio: f64,
}

impl Default for UltraParams {
    fn default() -> Self {
        let s = SobolevConfig::default();
        Self {
            d: 3,
            profile: "singular".into(),
            radius: 1.0,
            inner: 0.5,
            outer: 1.0,
            eps: logspace(1e-2, 1e-8, 7),
            sobolev: true,
            sobolev_s: s.s,
            sobolev_grids: s.grids,
            sobolev_period: s.period,
            divergent_ratio: latbs::counterexamples::threshold::BOUNDED_RATIO,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct UltraFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub sobolev: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    pub sobolev_grids: Option<Vec<usize>>,
}

pub struct UltraProbe;

impl Experiment for UltraProbe {
    const NAME: &'static str = "ultra-probe";
    const RESULT: &'static str = "logarithmic divergence of the ultrahyperbolic surface form; H^s blow-up at s = 1";
    const VERDICTS: &'static [&'static str] = &["divergent", "bounded"];
    type Params = UltraParams;

    fn run(p: &UltraParams, _seed: u64) -> Result<Outcome, CliError> {
        let profile = match p.profile.as_str() {
            "singular" => UltraProfile::Singular { radius: p.radius },
            "bounded" => UltraProfile::Bounded { inner: p.inner, outer: p.outer },
            "zero" => UltraProfile::Zero,
            other => return Err(usage("profile", format!("unknown profile '{other}' (singular, bounded, zero)"))),
        };
        let series = ultra_surface_form(p.d, &profile, &p.eps)?;
        let first = series.values[0];
        let last = *series.values.last().unwrap_or(&first);
        let divergent = series.log_slope > 0.0 && last > p.divergent_ratio * first;
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["eps", "value"]);
        for (e, v) in series.eps.iter().zip(&series.values) {
            t.push([e, v]);
        }
        let mut tables = vec![t];
        let sobolev = if p.sobolev {
            let tab = sobolev_blowup_probe(&SobolevConfig {
                d: p.d,
                s: p.sobolev_s.clone(),
                grids: p.sobolev_grids.clone(),
                period: p.sobolev_period,
            })?;
            let mut st = Table::new(format!("{}-sobolev.csv", Self::NAME), &["grid", "s", "norm"]);
            for r in &tab.rows {
                st.push([r.grid as f64, r.s, r.norm]);
            }
            tables.push(st);
            to_value(&tab)?
        } else {
            Value::Null
        };
        Ok(Outcome {
            verdict: if divergent { "divergent" } else { "bounded" },
            summary: format!("log slope {:.6}, last/first {:.4}", series.log_slope, last / first),
            report: json!({ "surface_form": to_value(&series)?, "sobolev": sobolev }),
            tables,
            extra: Vec::new(),
        })
    }
}

// ---------------------------------------------------- continuum-dispersive

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuumParams {
    pub d: usize,
    /// Number of negative signs in the ultrahyperbolic symbol.
    pub k: usize,
    pub t: Vec<f64>,
    pub sigma: f64,
    /// Points per axis; automatic when absent.
    pub points: Option<usize>,
    /// Allowed distance of the slope from `-d/2`.
    pub tolerance: f64,
}

impl Default for ContinuumParams {
    fn default() -> Self {
        Self {
            d: 2,
            k: 1,
            t: logspace(10.0, 1000.0, 9),
            sigma: ContinuumConfig::default().sigma,
            points: None,
            tolerance: 0.05,
        }
    }
}

#[derive(Args, Debug, Default, Serialize)]
pub struct ContinuumFlags {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

pub struct ContinuumDispersive;

impl Experiment for ContinuumDispersive {
    const NAME: &'static str = "continuum-dispersive";
    const RESULT: &'static str = "continuum dispersive rate t^{-d/2} for ultrahyperbolic propagators";
    const VERDICTS: &'static [&'static str] = &["match", "mismatch"];
    type Params = ContinuumParams;

    fn run(p: &ContinuumParams, _seed: u64) -> Result<Outcome, CliError> {
        if p.t.len() < 2 {
            return Err(usage("t", "need at least two times"));
        }
        let cfg = ContinuumConfig {
            sigma: p.sigma,
            points: p.points,
        };
        let pts = p
            .t
            .iter()
            .map(|&t| continuum_dispersive(p.d, p.k, t, &cfg))
            .collect::<latbs::Result<Vec<_>>>()?;
        let sups: Vec<f64> = pts.iter().map(|x| x.sup_norm).collect();
        let fit = loglog_fit(&p.t, &sups);
        let target = -(p.d as f64) / 2.0;
        let mut t = Table::new(format!("{}.csv", Self::NAME), &["t", "sup_norm", "envelope", "points", "spacing"]);
        for x in &pts {
            t.push([x.t, x.sup_norm, x.envelope, x.points as f64, x.spacing]);
        }
        Ok(Outcome {
            verdict: if (fit.slope - target).abs() < p.tolerance { "match" } else { "mismatch" },
            summary: format!("slope {:.4} (target {target})", fit.slope),
            report: json!({ "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual, "points": to_value(&pts)? }),
            tables: vec![t],
            extra: Vec::new(),
        })
    }
}
