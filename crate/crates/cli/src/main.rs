//! `latbs`: batch experiment runner.
//!
//! Parameter precedence: command-line flags, then the `params` block of
//! `--config`, then built-in defaults. Exit codes: 0 success, 1 usage or
//! run error, 2 failed `--assert`.

mod config;
mod experiments;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{merge_params, CliError, ExperimentConfig};
use experiments::*;
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

#[derive(Parser)]
#[command(name = "latbs", version, about = "Resolvent, Birman-Schwinger and dispersive experiments for H0 + V on Z^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $LATBS_OUTPUT_DIR/<command> or results/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Expected verdict; exit 2 if the run disagrees.
    #[arg(long = "assert")]
    expect: Option<String>,
}

macro_rules! flagged {
    ($name:ident, $flags:ty) => {
        #[derive(Args, Debug)]
        struct $name {
            #[command(flatten)]
            common: Common,
            #[command(flatten)]
            flags: $flags,
        }
    };
}

flagged!(SweepCmd, SweepFlags);
flagged!(EigCountCmd, EigCountFlags);
flagged!(WeakCmd, WeakCouplingFlags);
flagged!(DispersiveCmd, DispersiveFlags);
flagged!(StrichartzCmd, StrichartzFlags);
flagged!(KnappCmd, KnappFlags);
flagged!(FlatbandCmd, FlatbandFlags);
flagged!(ThresholdCmd, ThresholdFlags);
flagged!(HolderCmd, HolderFlags);
flagged!(UltraCmd, UltraFlags);
flagged!(ContinuumCmd, ContinuumFlags);

#[derive(Subcommand)]
enum Command {
    /// Run a config file; its `command` field selects the experiment.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long = "assert")]
        expect: Option<String>,
    },
    /// List experiments, or describe one.
    ListExperiments { name: Option<String> },
    /// Print the JSON schema of an experiment's `params` block.
    Schema { name: String },
    BsSweep(SweepCmd),
    EigCount(EigCountCmd),
    WeakCoupling(WeakCmd),
    DispersiveFit(DispersiveCmd),
    Strichartz(StrichartzCmd),
    Knapp(KnappCmd),
    Flatband(FlatbandCmd),
    ThresholdDiv(ThresholdCmd),
    HolderBv(HolderCmd),
    UltraProbe(UltraCmd),
    ContinuumDispersive(ContinuumCmd),
}

fn flags_value<T: Serialize>(flags: &T) -> Value {
    serde_json::to_value(flags).unwrap_or(Value::Null)
}

fn execute<E: Experiment>(mut cfg: ExperimentConfig, flags: Value, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(a) = &cfg.assert {
        if !E::VERDICTS.contains(&a.as_str()) {
            return Err(CliError::Usage(format!("--assert {a}: {} verdicts are {}", E::NAME, E::VERDICTS.join(", "))));
        }
    }
    let (mut params, _) = merge_params::<E::Params>(&cfg.params, flags)?;
    E::resolve(&mut params);
    cfg.params = serde_json::to_value(&params).map_err(|e| CliError::Run(e.to_string()))?;
    let dir = cfg.resolve_output(out);
    let started = SystemTime::now();
    let clock = Instant::now();
    let outcome = E::run(&params, cfg.seed)?;
    let wall = clock.elapsed();

    let envelope = output::Envelope {
        command: E::NAME,
        version: output::VERSION,
        seed: cfg.seed,
        params: &cfg.params,
        verdict: outcome.verdict,
        report: &outcome.report,
    };
    let json = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Run(e.to_string()))? + "\n";
    let mut files = vec![(format!("{}.json", E::NAME), json.into_bytes())];
    for t in &outcome.tables {
        files.push((t.file.clone(), t.to_bytes()?));
    }
    files.extend(outcome.extra);
    let replay = serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Run(e.to_string()))? + "\n";
    files.push(("config.json".to_string(), replay.into_bytes()));
    output::write_artifacts(&dir, &cfg, outcome.verdict, files, started, wall)?;
    println!("{}: verdict {} ({}); artifacts in {}", E::NAME, outcome.verdict, outcome.summary, dir.display());
    match &cfg.assert {
        Some(a) if a != outcome.verdict => Err(CliError::Assertion {
            expected: a.clone(),
            got: outcome.verdict.to_string(),
        }),
        _ => Ok(()),
    }
}

fn dispatch(cfg: ExperimentConfig, flags: Value, out: Option<&Path>) -> Result<(), CliError> {
    match cfg.command.as_str() {
        BsSweep::NAME => execute::<BsSweep>(cfg, flags, out),
        EigCount::NAME => execute::<EigCount>(cfg, flags, out),
        WeakCoupling::NAME => execute::<WeakCoupling>(cfg, flags, out),
        DispersiveFitCmd::NAME => execute::<DispersiveFitCmd>(cfg, flags, out),
        Strichartz::NAME => execute::<Strichartz>(cfg, flags, out),
        Knapp::NAME => execute::<Knapp>(cfg, flags, out),
        Flatband::NAME => execute::<Flatband>(cfg, flags, out),
        ThresholdDiv::NAME => execute::<ThresholdDiv>(cfg, flags, out),
        HolderBv::NAME => execute::<HolderBv>(cfg, flags, out),
        UltraProbe::NAME => execute::<UltraProbe>(cfg, flags, out),
        ContinuumDispersive::NAME => execute::<ContinuumDispersive>(cfg, flags, out),
        other => Err(CliError::Usage(format!("schema violation at `command`: unknown experiment '{other}'"))),
    }
}

fn schema(name: &str) -> Result<String, CliError> {
    let s = match name {
        BsSweep::NAME => schemars::schema_for!(SweepParams),
        EigCount::NAME => schemars::schema_for!(EigCountParams),
        WeakCoupling::NAME => schemars::schema_for!(WeakCouplingParams),
        DispersiveFitCmd::NAME => schemars::schema_for!(DispersiveParams),
        Strichartz::NAME => schemars::schema_for!(StrichartzParams),
        Knapp::NAME => schemars::schema_for!(KnappParams),
        Flatband::NAME => schemars::schema_for!(FlatbandParams),
        ThresholdDiv::NAME => schemars::schema_for!(ThresholdParams),
        HolderBv::NAME => schemars::schema_for!(HolderParams),
        UltraProbe::NAME => schemars::schema_for!(UltraParams),
        ContinuumDispersive::NAME => schemars::schema_for!(ContinuumParams),
        "config" => schemars::schema_for!(ExperimentConfig),
        other => return Err(CliError::Usage(format!("unknown experiment '{other}'"))),
    };
    serde_json::to_string_pretty(&s).map_err(|e| CliError::Run(e.to_string()))
}

fn list(name: Option<&str>) -> Result<(), CliError> {
    let rows: Vec<&CatalogEntry> = match name {
        None => CATALOG.iter().collect(),
        Some(n) => vec![CATALOG
            .iter()
            .find(|e| e.name == n)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment '{n}'")))?],
    };
    let width = CATALOG.iter().map(|e| e.name.len()).max().unwrap_or(0);
    for e in rows {
        println!("{:<width$}  {}  [verdicts: {}]", e.name, e.result, e.verdicts.join("|"));
    }
    Ok(())
}

fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Run(e.to_string()))?;
    }
    Ok(())
}

fn from_flags<F: Serialize>(name: &str, common: Common, flags: &F) -> Result<(), CliError> {
    set_threads(common.threads)?;
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(name),
    };
    if cfg.command != name {
        return Err(CliError::Usage(format!(
            "config is for '{}' but the '{name}' command was invoked",
            cfg.command
        )));
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.expect.is_some() {
        cfg.assert = common.expect;
    }
    dispatch(cfg, flags_value(flags), common.out.as_deref())
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, threads, expect } => {
            set_threads(threads)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            if expect.is_some() {
                cfg.assert = expect;
            }
            dispatch(cfg, Value::Null, out.as_deref())
        }
        Command::ListExperiments { name } => list(name.as_deref()),
        Command::Schema { name } => {
            println!("{}", schema(&name)?);
            Ok(())
        }
        Command::BsSweep(c) => from_flags(BsSweep::NAME, c.common, &c.flags),
        Command::EigCount(c) => from_flags(EigCount::NAME, c.common, &c.flags),
        Command::WeakCoupling(c) => from_flags(WeakCoupling::NAME, c.common, &c.flags),
        Command::DispersiveFit(c) => from_flags(DispersiveFitCmd::NAME, c.common, &c.flags),
        Command::Strichartz(c) => from_flags(Strichartz::NAME, c.common, &c.flags),
        Command::Knapp(c) => from_flags(Knapp::NAME, c.common, &c.flags),
        Command::Flatband(c) => from_flags(Flatband::NAME, c.common, &c.flags),
        Command::ThresholdDiv(c) => from_flags(ThresholdDiv::NAME, c.common, &c.flags),
        Command::HolderBv(c) => from_flags(HolderBv::NAME, c.common, &c.flags),
        Command::UltraProbe(c) => from_flags(UltraProbe::NAME, c.common, &c.flags),
        Command::ContinuumDispersive(c) => from_flags(ContinuumDispersive::NAME, c.common, &c.flags),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latbs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
