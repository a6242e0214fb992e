//! `qwalk`: experiment runner for quantum walks on the circle under
//! time-random coin angles. Subcommands run single evolutions, Monte Carlo
//! ensembles, exact averaged dynamics, post-processing of saved exports,
//! closed-form oracle tables, and the continuum and gauge self-checks.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical-validity
//! error, 3 cross-check failure.

mod config;
mod postprocess;
mod report;
mod runner;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{resolve, Format, Method, RunArgs};
use crate::report::emit;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    CrossCheck(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical-validity error: {msg}"),
            CliError::CrossCheck(msg) => write!(f, "cross-check failure: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::CrossCheck(_) => 3,
        }
    }
}

impl From<qwalk::Error> for CliError {
    fn from(err: qwalk::Error) -> Self {
        match err {
            qwalk::Error::InvalidConfig(msg) => CliError::Config(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Quantum walks on the circle under time-random coin angles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also run the exact averaged dynamics and compare final profiles;
    /// exits with status 3 if the L1 distance exceeds 4x the standard error.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Args)]
struct ObservablesArgs {
    /// A CSV or JSON file produced by evolve, ensemble, or averaged.
    #[arg(long)]
    input: PathBuf,
    /// Fit window `start,end` in steps; default is the second half.
    #[arg(long)]
    fit_window: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    /// Single width to evaluate; overrides the grid flags.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    sigma_min: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU - 0.05)]
    sigma_max: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct ContinuumArgs {
    /// Scale of the expansion ray (K, p, sigma) = epsilon * (1, 1, 1).
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct GaugeArgs {
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long = "M", default_value_t = 32)]
    m_half: usize,
    #[arg(long, default_value_t = 32)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// One run with the method given by --method (default pure).
    Evolve(RunArgs),
    /// Monte Carlo ensemble; optionally cross-check against the exact mean.
    Ensemble(EnsembleArgs),
    /// Exact averaged dynamics.
    Averaged(RunArgs),
    /// Post-process a saved export into fits and derived quantities.
    Observables(ObservablesArgs),
    /// Closed-form coefficient tables over a sigma grid.
    Oracles(OracleArgs),
    /// Order-of-agreement report for the continuum generator expansion.
    ContinuumCheck(ContinuumArgs),
    /// Gauge-invariance report over random phase fields.
    GaugeCheck(GaugeArgs),
}

fn parse_format(flag: &Option<String>) -> Result<Format, CliError> {
    match flag {
        Some(text) => Format::parse(text),
        None => Ok(Format::Csv),
    }
}

fn parse_fit_window(flag: &Option<String>) -> Result<Option<(u64, u64)>, CliError> {
    match flag {
        None => Ok(None),
        Some(text) => {
            let (a, b) = text.split_once(',').ok_or_else(|| {
                CliError::Config(format!(
                    "field `fit-window`: expected `start,end`, got `{text}`"
                ))
            })?;
            let parse = |s: &str| {
                s.trim().parse::<u64>().map_err(|_| {
                    CliError::Config(format!("field `fit-window`: cannot parse `{s}`"))
                })
            };
            Ok(Some((parse(a)?, parse(b)?)))
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Evolve(args) => {
            let cfg = resolve(&args, None)?;
            let bundle = runner::run_experiment(&cfg, "evolve")?;
            emit(&bundle.render(cfg.format), cfg.out.as_deref())
        }
        Command::Averaged(args) => {
            let cfg = resolve(&args, Some(Method::ExactAveraged))?;
            let bundle = runner::run_experiment(&cfg, "averaged")?;
            emit(&bundle.render(cfg.format), cfg.out.as_deref())
        }
        Command::Ensemble(args) => {
            let cfg = resolve(&args.run, Some(Method::MonteCarlo))?;
            if args.cross_check {
                let (bundle, pass) = runner::cross_check(&cfg, "ensemble")?;
                emit(&bundle.render(cfg.format), cfg.out.as_deref())?;
                if !pass {
                    return Err(CliError::CrossCheck(
                        "Monte Carlo profile left the 4x standard-error budget \
                         around the exact average"
                            .into(),
                    ));
                }
                Ok(())
            } else {
                let bundle = runner::run_experiment(&cfg, "ensemble")?;
                emit(&bundle.render(cfg.format), cfg.out.as_deref())
            }
        }
        Command::Observables(args) => {
            let format = parse_format(&args.format)?;
            let window = parse_fit_window(&args.fit_window)?;
            let saved = postprocess::parse_saved(&args.input)?;
            let table = postprocess::derive(&saved, window)?;
            emit(&table.render(format, "derived"), args.out.as_deref())
        }
        Command::Oracles(args) => {
            let format = parse_format(&args.format)?;
            let sigmas = match args.sigma {
                Some(sigma) => vec![sigma],
                None => {
                    if args.points == 0 {
                        return Err(CliError::Config(
                            "field `points`: the grid needs at least one point".into(),
                        ));
                    }
                    if args.points == 1 {
                        vec![args.sigma_min]
                    } else {
                        let (lo, hi) = (args.sigma_min, args.sigma_max);
                        if !(lo > 0.0 && hi < std::f64::consts::TAU && lo <= hi) {
                            return Err(CliError::Config(format!(
                                "field `sigma-min`/`sigma-max`: the grid [{lo}, {hi}] \
                                 must lie inside (0, 2*pi)"
                            )));
                        }
                        (0..args.points)
                            .map(|i| lo + (hi - lo) * i as f64 / (args.points - 1) as f64)
                            .collect()
                    }
                }
            };
            for sigma in &sigmas {
                if !(*sigma > 0.0 && *sigma < std::f64::consts::TAU) {
                    return Err(CliError::Config(format!(
                        "field `sigma`: {sigma} lies outside (0, 2*pi)"
                    )));
                }
            }
            let table = runner::oracle_table(&sigmas);
            emit(&table.render(format, "oracle"), args.out.as_deref())
        }
        Command::ContinuumCheck(args) => {
            let format = parse_format(&args.format)?;
            if !(args.epsilon > 0.0 && args.epsilon < 0.1) {
                return Err(CliError::Config(format!(
                    "field `epsilon`: {} is outside the expansion regime (0, 0.1)",
                    args.epsilon
                )));
            }
            let (table, pass) = runner::continuum_report(args.epsilon);
            emit(&table.render(format, "entry_orders"), args.out.as_deref())?;
            if !pass {
                return Err(CliError::Numerical(
                    "the numerically expanded generator failed its order test".into(),
                ));
            }
            Ok(())
        }
        Command::GaugeCheck(args) => {
            let format = parse_format(&args.format)?;
            if args.trials == 0 {
                return Err(CliError::Config(
                    "field `trials`: at least one trial is required".into(),
                ));
            }
            let (table, pass) = runner::gauge_report(args.trials, args.m_half, args.steps, args.seed)?;
            emit(&table.render(format, "gauge_trials"), args.out.as_deref())?;
            if !pass {
                return Err(CliError::Numerical(
                    "a gauge transformation moved an invariant beyond 1e-12".into(),
                ));
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
