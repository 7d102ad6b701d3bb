//! `irslink` — command-line runner for the link-level experiments in the
//! `irslink` library: symbol-error-rate sweeps, gain curves, effective-rate
//! curves, and the engine's self-check suite.
//!
//! Every run writes one CSV (fixed schema, 17-significant-digit floats) and a
//! `manifest.json` naming the seed and configuration hash, so results are
//! reproducible byte for byte. Exit codes: 0 success, 1 runtime failure,
//! 2 self-check failure, 3 configuration or usage error.

mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{Experiment, Inputs, ResolvedConfig};
use irslink::simkit::{self, SimError};

#[derive(Parser)]
#[command(
    name = "irslink",
    version,
    about = "Link-level experiments for an IRS-integrated access point",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Built-in scenario preset supplying every default.
    #[arg(long, global = true, default_value = "paper-default", value_name = "NAME")]
    preset: String,

    /// Sectioned key=value config file applied over the preset.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed for all pseudo-random draws.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Directory for CSV and manifest output (created if missing).
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out: PathBuf,

    /// Single key=value override; repeatable, applied in order.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Comma-separated transmission scheme tags to simulate.
    #[arg(long, global = true, value_name = "TAG,TAG,...")]
    schemes: Option<String>,

    /// Sweep grid: var=start:stop:step or var=v1,v2,v3 (dB/dBm suffixes ok).
    #[arg(long, global = true, value_name = "VAR=SPEC")]
    sweep: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Symbol error rate of the selected schemes across transmit power.
    SerVsPower,
    /// Symbol error rate across square surface sizes.
    SerVsElements,
    /// Reflected and beamforming gains across square surface sizes.
    GainVsElements,
    /// Beamforming and direct-link gains across user-2 distance.
    GainVsDistance,
    /// Effective rate across coherence-interval lengths.
    RateVsCoherence,
    /// Run the engine's invariant and oracle self-checks.
    Validate,
    /// Print a matplotlib helper script that plots the emitted CSVs.
    PlotScript,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::SerVsPower => Experiment::SerVsPower,
            Command::SerVsElements => Experiment::SerVsElements,
            Command::GainVsElements => Experiment::GainVsElements,
            Command::GainVsDistance => Experiment::GainVsDistance,
            Command::RateVsCoherence => Experiment::RateVsCoherence,
            Command::Validate => Experiment::Validate,
            Command::PlotScript => Experiment::PlotScript,
        }
    }
}

/// Failure classes, each mapped to a distinct process exit code.
enum CliError {
    /// Bad flags, bad config values, or violated scenario invariants.
    Config(String),
    /// I/O or numerical failure during an otherwise valid run.
    Runtime(String),
    /// The self-check suite ran and reported failures.
    Validation { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Validation { .. } => 2,
            CliError::Config(_) => 3,
        }
    }
}

/// Sorts engine errors into configuration mistakes (the input was wrong)
/// versus runtime failures (the input was fine, the run was not).
fn classify(err: &SimError) -> CliError {
    match err {
        SimError::Grouping { .. } => CliError::Config(format!(
            "{err} (choose a surface whose sides the subsurface edge divides, e.g. --set n_bar=100)"
        )),
        SimError::NoSchemes
        | SimError::EmptySweep
        | SimError::NonpositiveSweep(_)
        | SimError::ZeroTrials
        | SimError::ZeroCoherence
        | SimError::Channel(_) => CliError::Config(err.to_string()),
        SimError::Analytics(_) | SimError::Beamforming(_) => CliError::Runtime(err.to_string()),
    }
}

fn run_validate(seed: u64) -> Result<(), CliError> {
    let results = simkit::validate(seed);
    let mut failed = 0usize;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {} — {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} checks run, {failed} failed", results.len());
    if failed > 0 {
        Err(CliError::Validation {
            failed,
            total: results.len(),
        })
    } else {
        Ok(())
    }
}

fn run_experiment(
    out_dir: &std::path::Path,
    experiment: Experiment,
    resolved: &ResolvedConfig,
) -> Result<(), CliError> {
    let spec = resolved.run_spec().map_err(CliError::Config)?;
    let result = match experiment {
        Experiment::SerVsPower => simkit::run_ser_vs_power(&spec, &resolved.sweep_values),
        Experiment::SerVsElements => {
            simkit::run_ser_vs_elements(&spec, &resolved.sweep_as_counts())
        }
        Experiment::GainVsElements => {
            simkit::run_gain_vs_elements(&spec, &resolved.sweep_as_counts())
        }
        Experiment::GainVsDistance => {
            simkit::run_gain_vs_distance(&spec, &resolved.sweep_values)
        }
        Experiment::RateVsCoherence => {
            simkit::run_rate_vs_coherence(&spec, &resolved.sweep_as_intervals())
        }
        Experiment::Validate | Experiment::PlotScript => unreachable!("handled by caller"),
    }
    .map_err(|e| classify(&e))?;

    let files = output::emit(out_dir, experiment.name(), &result, env!("CARGO_PKG_VERSION"))
        .map_err(CliError::Runtime)?;
    for path in files {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let experiment = cli.command.experiment();
    let inputs = Inputs {
        experiment,
        preset: &cli.preset,
        config_path: cli.config.as_deref(),
        seed: cli.seed,
        sets: &cli.set,
        schemes: cli.schemes.as_deref(),
        sweep: cli.sweep.as_deref(),
    };
    let resolved = config::resolve(&inputs).map_err(CliError::Config)?;
    match experiment {
        Experiment::Validate => run_validate(resolved.seed),
        Experiment::PlotScript => output::write_plot_script(std::io::stdout().lock())
            .map_err(|e| CliError::Runtime(e.to_string())),
        _ => run_experiment(&cli.out, experiment, &resolved),
    }
}

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|err| {
        use clap::error::ErrorKind;
        let code = match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 3,
        };
        let _ = err.print();
        std::process::exit(code);
    });
    if let Err(err) = run(&cli) {
        match &err {
            CliError::Config(msg) => eprintln!("config error: {msg}"),
            CliError::Runtime(msg) => eprintln!("error: {msg}"),
            CliError::Validation { failed, total } => {
                eprintln!("validation failed: {failed} of {total} checks")
            }
        }
        std::process::exit(err.exit_code());
    }
}
