//! `horolab`: batch driver for the horocycle-flow numerical laboratory.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use config::{parse_list, Config};
use output::{Artifacts, Criterion};

#[derive(Parser)]
#[command(name = "horolab", version, about = "Horocycle flows, renormalization cocycles and limit laws")]
struct Cli {
    /// JSON file with flat dotted keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for the artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to HOROLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lie brackets and flow commutation identities.
    FlowCheck {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Relator, Monte Carlo area and reduction checks for the surface group.
    SurfaceCheck {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        reductions: Option<usize>,
    },
    /// Variance growth of horocycle ergodic integrals.
    ErgodicScan {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        batches: Option<usize>,
        /// Comma-separated T grid for the variance fit.
        #[arg(long = "T")]
        t_grid: Option<String>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Residual tables for the principal and complementary series model.
    ModelAsymptotics {
        /// Comma-separated parameters, e.g. `0.3,0.5,i,2i`.
        #[arg(long)]
        nu: Option<String>,
        #[arg(long = "T")]
        t_grid: Option<String>,
    },
    /// Renormalized limits, consistency and Hölder reports.
    Renorm {
        /// Forcing JSON to include in the consistency scan.
        #[arg(long)]
        forcing: Option<PathBuf>,
        /// Spectral observable JSON to round-trip.
        #[arg(long)]
        observable: Option<PathBuf>,
        #[arg(long)]
        nu: Option<String>,
    },
    /// Torus distributions, Lévy scans and moment tests.
    LimitLab {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        thetas: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Preset {
    ComplexGaussian,
    StretchedGaussian,
    Ray,
    TorusComplementary,
    TorusPrincipal,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::ComplexGaussian => "complex-gaussian",
            Preset::StretchedGaussian => "stretched-gaussian",
            Preset::Ray => "ray",
            Preset::TorusComplementary => "torus-complementary",
            Preset::TorusPrincipal => "torus-principal",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        <Preset as ValueEnum>::from_str(s, false).map_err(|_| anyhow::anyhow!("unknown preset {s:?}"))
    }
}

fn complex_flag(s: &str) -> Result<Value> {
    let items = s
        .split(',')
        .map(|x| Value::String(x.trim().to_string()))
        .collect();
    Ok(Value::Array(items))
}

fn list_flag(s: &str) -> Result<Value> {
    Ok(Value::from(parse_list(s)?))
}

/// Writes flag values over the matching config keys.
fn apply_flags(cfg: &mut Config, cmd: &Command) -> Result<&'static str> {
    let mut put = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            cfg.set(k, v);
        }
    };
    Ok(match cmd {
        Command::FlowCheck { samples } => {
            put("flow.samples", samples.map(Value::from));
            "flow-check"
        }
        Command::SurfaceCheck { samples, reductions } => {
            put("surface.area_samples", samples.map(Value::from));
            put("surface.reductions", reductions.map(Value::from));
            "surface-check"
        }
        Command::ErgodicScan {
            samples,
            batches,
            t_grid,
            step,
            starts,
        } => {
            put("ergodic.samples", samples.map(Value::from));
            put("ergodic.batches", batches.map(Value::from));
            put("ergodic.T", t_grid.as_deref().map(list_flag).transpose()?);
            put("ergodic.step", step.map(Value::from));
            put("ergodic.birkhoff.starts", starts.map(Value::from));
            "ergodic-scan"
        }
        Command::ModelAsymptotics { nu, t_grid } => {
            put("model.nu", nu.as_deref().map(complex_flag).transpose()?);
            put("model.T", t_grid.as_deref().map(list_flag).transpose()?);
            "model-asymptotics"
        }
        Command::Renorm { forcing, observable, nu } => {
            put("renorm.forcing", forcing.as_ref().map(|p| Value::from(p.display().to_string())));
            put("renorm.observable", observable.as_ref().map(|p| Value::from(p.display().to_string())));
            put("renorm.nu", nu.as_deref().map(complex_flag).transpose()?);
            "renorm"
        }
        Command::LimitLab { preset, samples, thetas } => {
            put("limit.preset", preset.map(|p| Value::from(p.name())));
            put("limit.samples", samples.map(Value::from));
            put("limit.thetas", thetas.map(Value::from));
            "limit-lab"
        }
    })
}

fn configure_threads(flag: Option<usize>, cfg: &Config) -> Result<()> {
    let from_env = match std::env::var("HOROLAB_THREADS") {
        Ok(s) => Some(
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("HOROLAB_THREADS={s:?} is not a thread count"))?,
        ),
        Err(_) => None,
    };
    let from_cfg = cfg.u64_opt("threads")?.map(|n| n as usize);
    if let Some(n) = flag.or(from_cfg).or(from_env) {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::empty(),
    };
    let name = apply_flags(&mut cfg, &cli.command)?;
    configure_threads(cli.threads, &cfg)?;
    let seed = cli.seed.or(cfg.u64_opt("seed")?);
    let out = match &cli.out {
        Some(p) => p.clone(),
        None => PathBuf::from(cfg.string("out", "horolab-out")?),
    };
    let artifacts = Artifacts::create(&out)?;
    let need_seed = || seed.with_context(|| format!("{name} samples randomly and needs --seed or a \"seed\" key"));
    let criteria: Vec<Criterion> = match cli.command {
        Command::FlowCheck { .. } => commands::flow::run(&cfg, need_seed()?, &artifacts)?,
        Command::SurfaceCheck { .. } => commands::surface::run(&cfg, need_seed()?, &artifacts)?,
        Command::ErgodicScan { .. } => commands::ergodic::run(&cfg, need_seed()?, &artifacts)?,
        Command::ModelAsymptotics { .. } => commands::model::run(&cfg, &artifacts)?,
        Command::Renorm { .. } => commands::renorm::run(&cfg, &artifacts)?,
        Command::LimitLab { .. } => commands::limit::run(&cfg, need_seed()?, &artifacts)?,
    };
    for c in criteria.iter().filter(|c| !c.pass) {
        eprintln!("[{name}] FAIL {}: {} vs {}", c.criterion, c.value, c.threshold);
    }
    artifacts.summary(name, seed, &criteria)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("horolab: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
