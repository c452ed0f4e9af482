//! Command-line front end: runs one experiment from a config file and emits
//! its report as canonical JSON or CSV. Exit codes: 0 on success, 2 when a
//! declared pass/fail flag failed, 1 on errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use covering_lab::config::{ExperimentConfig, ExperimentKind};
use covering_lab::error::{Error, Result};
use covering_lab::experiments::run_trials;

#[derive(Parser)]
#[command(
    name = "cover",
    version,
    about = "Random covering set laboratory",
    long_about = "Monte Carlo experiments on random covering sets: coverage \
                  dichotomies, dimension estimates, shrinking-target hitting, \
                  second-moment bounds, ball-intersection density, mixing \
                  profiles, series criteria, and regularity checks."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (flat `key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of the config's `output` (or stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Coverage dichotomy: limsup surrogate and late-window fraction
    Dichotomy(RunArgs),
    /// Convergence-exponent bracketing and box-counting fit
    Dimension(RunArgs),
    /// Shrinking-target hit counts and window indicators
    Hitting(RunArgs),
    /// Second-moment lower bounds on hit-count concentration
    Pz(RunArgs),
    /// Ball-intersection density over a mesh of test balls
    Density(RunArgs),
    /// Dependence-decay profile with exponential fit
    Mixing(RunArgs),
    /// Series criterion checkpoints for circle covering
    Shepp(RunArgs),
    /// Regularity exponent and envelope estimation
    Ahlfors(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Dichotomy(a) => (ExperimentKind::Dichotomy, a),
            Command::Dimension(a) => (ExperimentKind::Dimension, a),
            Command::Hitting(a) => (ExperimentKind::Hitting, a),
            Command::Pz(a) => (ExperimentKind::Pz, a),
            Command::Density(a) => (ExperimentKind::Density, a),
            Command::Mixing(a) => (ExperimentKind::Mixing, a),
            Command::Shepp(a) => (ExperimentKind::Shepp, a),
            Command::Ahlfors(a) => (ExperimentKind::Ahlfors, a),
        }
    }
}

/// COVERING_LAB_THREADS caps the worker pool; reports are byte-identical
/// across pool sizes, so this only trades wall-clock for cores.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("COVERING_LAB_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    match cfg.experiment {
        None => cfg.experiment = Some(kind),
        Some(k) if k != kind => {
            return Err(Error::Config(format!(
                "experiment: config names `{}` but the subcommand is `{}`",
                k.name(),
                kind.name()
            )))
        }
        Some(_) => {}
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }

    let started = Instant::now();
    let report = run_trials(&cfg)?;
    let elapsed = started.elapsed().as_secs_f64();
    let payload = match args.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &payload)?;
            eprintln!(
                "{}: wrote {} ({} metrics, {} flags) in {elapsed:.2}s",
                report.experiment,
                path.display(),
                report.metrics.len(),
                report.flags.len()
            );
        }
        None => {
            print!("{payload}");
            eprintln!("{}: finished in {elapsed:.2}s", report.experiment);
        }
    }
    if report.failed() {
        for f in report.flags.iter().filter(|f| !f.pass) {
            eprintln!(
                "FAIL {}: observed {} {} {}",
                f.name, f.observed, f.op, f.threshold
            );
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
