//! `dispcomp` — simulate, estimate, and rate a dispersion-asymmetric
//! two-arm interference link from the command line.
//!
//! Every run resolves one [`config::Config`] (file plus `--set` overrides),
//! executes a single subcommand, writes its artifacts under `--out-dir`,
//! and prints a JSON receipt to stdout.
//!
//! Exit codes: `0` success; `2` configuration or input-file error; `3`
//! numerical or estimation failure; `4` protocol ran but the selection was
//! inconclusive (the report is still written).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{Arm, CommandOutcome};
use dispcomp_core::keyrate::RateMode;

#[derive(Debug, Parser)]
#[command(
    name = "dispcomp",
    version,
    about = "Dispersion pre-compensation toolkit for asymmetric two-arm interference links"
)]
struct Cli {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key by dotted path, e.g.
    /// `--set fiber_b.length_km=25`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Directory the artifacts are written to.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,

    /// RNG seed for noisy runs; overrides `sim.seed`.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the source pulse envelope (pulse.csv).
    Pulse,
    /// Synthesize a pre-compensated launch pulse and its modulator drives
    /// (precompensated.csv, modulator.csv).
    Compensate {
        /// Arm whose accumulated dispersion is pre-compensated.
        #[arg(long, value_enum, default_value_t = Arm::B)]
        arm: Arm,
        /// Pre-compensate for this dispersion (ps²) instead of the arm's
        /// configured value.
        #[arg(
            long = "dispersion-ps2",
            value_name = "PS2",
            allow_negative_numbers = true
        )]
        dispersion_ps2: Option<f64>,
    },
    /// Simulate the two-arm coincidence curve (hom_curve.csv,
    /// hom_summary.json).
    Hom,
    /// Estimate the dispersion asymmetry from a measured curve file
    /// (estimate.json).
    Estimate {
        /// Curve file with header `delay_ps,coincidence_norm`.
        #[arg(long, value_name = "FILE")]
        curve: PathBuf,
    },
    /// Run the blind three-phase compensation-selection protocol
    /// (protocol_report.json, protocol_table.txt).
    Protocol,
    /// Sweep the dispersive-arm length and tabulate secret-key rates
    /// (keyrate_sweep.csv).
    Keyrate {
        /// First swept length, km.
        #[arg(long, value_name = "KM", default_value_t = 0.0)]
        length_min_km: f64,
        /// Last swept length, km.
        #[arg(long, value_name = "KM", default_value_t = 120.0)]
        length_max_km: f64,
        /// Sweep step, km.
        #[arg(long, value_name = "KM", default_value_t = 2.0)]
        step_km: f64,
        /// Rate formula variant.
        #[arg(long, value_enum, default_value_t = ModeArg::Asymptotic)]
        mode: ModeArg,
    },
}

/// CLI surface of [`RateMode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Verbatim,
    Asymptotic,
}

impl From<ModeArg> for RateMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Verbatim => RateMode::Verbatim,
            ModeArg::Asymptotic => RateMode::Asymptotic,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            match serde_json::to_string_pretty(&outcome.report) {
                Ok(receipt) => println!("{receipt}"),
                Err(err) => {
                    eprintln!("error: cannot serialize run report: {err}");
                    return ExitCode::from(3);
                }
            }
            ExitCode::from(u8::try_from(outcome.exit_code).unwrap_or(1))
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn run(cli: Cli) -> Result<CommandOutcome> {
    let mut config = config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(seed) = cli.seed {
        config.sim.seed = Some(seed);
    }
    let out_dir = cli.out_dir.as_path();
    match cli.command {
        Command::Pulse => commands::run_pulse(&config, out_dir),
        Command::Compensate {
            arm,
            dispersion_ps2,
        } => commands::run_compensate(&config, out_dir, arm, dispersion_ps2),
        Command::Hom => commands::run_hom(&config, out_dir),
        Command::Estimate { curve } => commands::run_estimate(&config, out_dir, &curve),
        Command::Protocol => commands::run_protocol(&config, out_dir),
        Command::Keyrate {
            length_min_km,
            length_max_km,
            step_km,
            mode,
        } => commands::run_keyrate(
            &config,
            out_dir,
            length_min_km,
            length_max_km,
            step_km,
            mode.into(),
        ),
    }
}

/// Maps an error to the documented exit codes: configuration and input
/// problems exit 2, numerical and estimation failures exit 3.
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<dispcomp_core::Error>() {
        Some(core_err) if !core_err.is_configuration() => 3,
        _ => 2,
    }
}
