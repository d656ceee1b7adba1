//! Command-line front end for the simulation harness. Subcommands pick a
//! family of runs, a config file supplies `key = value` settings, and
//! flags override individual entries. Exit code 0 on success, 1 for
//! configuration errors, 2 for I/O or simulation failures.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use homsim::harness::{build_config, lex_config, run, ConfigError, RunError, Settings};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "homsim", version, about = "Two-photon interference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coincidence dip against relative delay, analytic or pair-averaged
    HomScan(HomScanArgs),
    /// Interferometer fringes from the closed-form intensities
    MziScan(MziScanArgs),
    /// Pulsed detection-event runs with counting-statistics estimates
    EventSim(EventSimArgs),
    /// Mean single-arm intensity against path position
    WashoutScan(WashoutScanArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file of `key = value` lines; flags override its entries
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed for every random draw in the run
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
    /// Number of grid points in the scan
    #[arg(long)]
    steps: Option<u64>,
}

#[derive(Args)]
struct HomScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dip flavour (defaults to hom-ensemble)
    #[arg(long, value_parser = ["hom-analytic", "hom-ensemble"])]
    mode: Option<String>,
    /// Spread of the pair detuning distribution in Hz
    #[arg(long)]
    sigma_f: Option<f64>,
    /// Number of down-converted pairs in the ensemble
    #[arg(long)]
    n_pairs: Option<u64>,
    /// Pump carrier frequency in Hz
    #[arg(long)]
    f0: Option<f64>,
    /// Lower edge of the delay grid in seconds
    #[arg(long)]
    tau_min: Option<f64>,
    /// Upper edge of the delay grid in seconds
    #[arg(long)]
    tau_max: Option<f64>,
}

#[derive(Args)]
struct MziScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input intensity at the first splitter
    #[arg(long)]
    i0: Option<f64>,
    /// Lower edge of the phase grid in radians
    #[arg(long)]
    phi_min: Option<f64>,
    /// Upper edge of the phase grid in radians
    #[arg(long)]
    phi_max: Option<f64>,
}

#[derive(Args)]
struct EventSimArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Event source: pair stream (hom-event) or attenuated laser (mzi-event)
    #[arg(long, value_parser = ["hom-event", "mzi-event"])]
    mode: Option<String>,
    /// Spread of the pair detuning distribution in Hz
    #[arg(long)]
    sigma_f: Option<f64>,
    /// Number of down-converted pairs cycled through the pulse train
    #[arg(long)]
    n_pairs: Option<u64>,
    /// Pump carrier frequency in Hz
    #[arg(long)]
    f0: Option<f64>,
    /// Lower edge of the delay grid in seconds
    #[arg(long)]
    tau_min: Option<f64>,
    /// Upper edge of the delay grid in seconds
    #[arg(long)]
    tau_max: Option<f64>,
    /// Mean photon number per pulse of the laser source
    #[arg(long)]
    mean_n: Option<f64>,
    /// Laser carrier frequency in Hz
    #[arg(long)]
    carrier_f: Option<f64>,
    /// Laser coherence time in seconds
    #[arg(long)]
    coherence_time: Option<f64>,
    /// Lower edge of the phase grid in radians
    #[arg(long)]
    phi_min: Option<f64>,
    /// Upper edge of the phase grid in radians
    #[arg(long)]
    phi_max: Option<f64>,
    /// Number of pulses per grid point
    #[arg(long)]
    n_pulses: Option<u64>,
    /// Pulse repetition period in seconds
    #[arg(long)]
    pulse_period: Option<f64>,
    /// Coincidence window in seconds
    #[arg(long)]
    coincidence_window: Option<f64>,
}

#[derive(Args)]
struct WashoutScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Spread of the pair detuning distribution in Hz
    #[arg(long)]
    sigma_f: Option<f64>,
    /// Number of down-converted pairs in the ensemble
    #[arg(long)]
    n_pairs: Option<u64>,
    /// Pump carrier frequency in Hz
    #[arg(long)]
    f0: Option<f64>,
    /// Lower edge of the position grid in metres
    #[arg(long)]
    x_min: Option<f64>,
    /// Upper edge of the position grid in metres
    #[arg(long)]
    x_max: Option<f64>,
}

/// One subcommand reduced to its mode constraints and key overrides.
struct Invocation {
    common: CommonArgs,
    mode_flag: Option<String>,
    allowed: &'static [&'static str],
    fallback: Option<&'static str>,
    subcommand: &'static str,
    overrides: Vec<(&'static str, String)>,
}

fn push_f64(overrides: &mut Vec<(&'static str, String)>, key: &'static str, value: Option<f64>) {
    if let Some(v) = value {
        overrides.push((key, format!("{v}")));
    }
}

fn push_u64(overrides: &mut Vec<(&'static str, String)>, key: &'static str, value: Option<u64>) {
    if let Some(v) = value {
        overrides.push((key, v.to_string()));
    }
}

impl Command {
    fn into_invocation(self) -> Invocation {
        let mut overrides = Vec::new();
        match self {
            Command::HomScan(args) => {
                push_f64(&mut overrides, "sigma_f", args.sigma_f);
                push_u64(&mut overrides, "n_pairs", args.n_pairs);
                push_f64(&mut overrides, "f0", args.f0);
                push_f64(&mut overrides, "tau_min", args.tau_min);
                push_f64(&mut overrides, "tau_max", args.tau_max);
                Invocation {
                    common: args.common,
                    mode_flag: args.mode,
                    allowed: &["hom-analytic", "hom-ensemble"],
                    fallback: Some("hom-ensemble"),
                    subcommand: "hom-scan",
                    overrides,
                }
            }
            Command::MziScan(args) => {
                push_f64(&mut overrides, "i0", args.i0);
                push_f64(&mut overrides, "phi_min", args.phi_min);
                push_f64(&mut overrides, "phi_max", args.phi_max);
                Invocation {
                    common: args.common,
                    mode_flag: Some("mzi-scan".to_string()),
                    allowed: &["mzi-scan"],
                    fallback: None,
                    subcommand: "mzi-scan",
                    overrides,
                }
            }
            Command::EventSim(args) => {
                push_f64(&mut overrides, "sigma_f", args.sigma_f);
                push_u64(&mut overrides, "n_pairs", args.n_pairs);
                push_f64(&mut overrides, "f0", args.f0);
                push_f64(&mut overrides, "tau_min", args.tau_min);
                push_f64(&mut overrides, "tau_max", args.tau_max);
                push_f64(&mut overrides, "mean_n", args.mean_n);
                push_f64(&mut overrides, "carrier_f", args.carrier_f);
                push_f64(&mut overrides, "coherence_time", args.coherence_time);
                push_f64(&mut overrides, "phi_min", args.phi_min);
                push_f64(&mut overrides, "phi_max", args.phi_max);
                push_u64(&mut overrides, "n_pulses", args.n_pulses);
                push_f64(&mut overrides, "pulse_period", args.pulse_period);
                push_f64(&mut overrides, "coincidence_window", args.coincidence_window);
                Invocation {
                    common: args.common,
                    mode_flag: args.mode,
                    allowed: &["hom-event", "mzi-event"],
                    fallback: None,
                    subcommand: "event-sim",
                    overrides,
                }
            }
            Command::WashoutScan(args) => {
                push_f64(&mut overrides, "sigma_f", args.sigma_f);
                push_u64(&mut overrides, "n_pairs", args.n_pairs);
                push_f64(&mut overrides, "f0", args.f0);
                push_f64(&mut overrides, "x_min", args.x_min);
                push_f64(&mut overrides, "x_max", args.x_max);
                Invocation {
                    common: args.common,
                    mode_flag: Some("washout-scan".to_string()),
                    allowed: &["washout-scan"],
                    fallback: None,
                    subcommand: "washout-scan",
                    overrides,
                }
            }
        }
    }
}

/// Settles the effective mode before field overrides apply: an explicit
/// flag wins (conflicting with a different file mode), otherwise a file
/// mode is accepted when this subcommand can drive it, otherwise the
/// subcommand fallback fills in.
fn resolve_mode(settings: &mut Settings, inv: &Invocation) -> Result<(), ConfigError> {
    if let Some(mode) = &inv.mode_flag {
        return settings.override_entry("mode", mode);
    }
    if let Some(file_mode) = settings.get("mode") {
        if !inv.allowed.contains(&file_mode) {
            return Err(ConfigError::ModeConflict {
                file_mode: file_mode.to_string(),
                cli_mode: inv.subcommand.to_string(),
            });
        }
        return Ok(());
    }
    match inv.fallback {
        Some(mode) => {
            settings.default_entry("mode", mode);
            Ok(())
        }
        None => Err(ConfigError::MissingMode),
    }
}

enum Failure {
    Read { path: String, err: std::io::Error },
    Config(ConfigError),
    Run(RunError),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Run(RunError::Config(_)) => 1,
            Failure::Read { .. } | Failure::Run(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Read { path, err } => write!(f, "cannot read config '{path}': {err}"),
            Failure::Config(err) => err.fmt(f),
            Failure::Run(err) => err.fmt(f),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Failure::Config(err)
    }
}

impl From<RunError> for Failure {
    fn from(err: RunError) -> Self {
        Failure::Run(err)
    }
}

fn drive(inv: Invocation) -> Result<(), Failure> {
    let text = match &inv.common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|err| Failure::Read {
            path: path.display().to_string(),
            err,
        })?,
        None => String::new(),
    };
    let mut settings = lex_config(&text)?;
    resolve_mode(&mut settings, &inv)?;
    for (key, value) in &inv.overrides {
        settings.override_entry(key, value)?;
    }
    if let Some(seed) = inv.common.seed {
        settings.override_entry("seed", &seed.to_string())?;
    }
    if let Some(output) = &inv.common.output {
        settings.override_entry("output", output)?;
    }
    if let Some(steps) = inv.common.steps {
        settings.override_entry("steps", &steps.to_string())?;
    }
    let cfg = build_config(settings)?;
    let scan = run(&cfg)?;
    println!(
        "{}: {} points -> {}",
        cfg.mode.name(),
        scan.points.len(),
        cfg.output
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match drive(cli.command.into_invocation()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
