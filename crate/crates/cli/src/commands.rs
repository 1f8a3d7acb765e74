//! Subcommand implementations.
//!
//! Each command resolves its inputs from the [`Config`], drives the library,
//! writes its artifacts through [`crate::output`], and returns a
//! [`RunReport`] plus the process exit code. Nothing here prints; the
//! caller owns stdout.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use dispcomp_core::estimator::{
    asymmetry_from_fwhm, asymmetry_from_visibility, run_blind_protocol, AsymmetryRoute,
    ExpectedReference, NoiseSpec, ProtocolReport, ProtocolSettings, Selection,
};
use dispcomp_core::hom::{self, CoincidenceCurve, HomSummary};
use dispcomp_core::keyrate::{self, RateMode};
use dispcomp_core::signal::{ComplexEnvelope, FiberSpec, PulseSpec, TimeGrid};
use dispcomp_core::Error as CoreError;

use crate::config::Config;
use crate::output::{
    self, write_curve_csv, write_envelope_csv, write_json, write_modulator_csv, write_sweep_csv,
    RunReport,
};

/// Visibility slack granted to an externally measured curve of unstated
/// counting statistics before it is declared inconsistent with the source
/// ceiling.
const DEFAULT_CEILING_TOLERANCE: f64 = 0.02;

/// A finished command: its receipt and the exit code it asks for.
pub struct CommandOutcome {
    pub report: RunReport,
    pub exit_code: i32,
}

impl CommandOutcome {
    fn success(report: RunReport) -> Self {
        Self {
            report,
            exit_code: 0,
        }
    }
}

/// Which arm a single-arm command addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Arm {
    /// Alice's arm (`fiber_a`).
    A,
    /// Bob's arm (`fiber_b`).
    B,
}

impl Arm {
    fn fiber(self, config: &Config) -> &FiberSpec {
        match self {
            Arm::A => &config.fiber_a,
            Arm::B => &config.fiber_b,
        }
    }
}

// ---------------------------------------------------------------------------
// pulse
// ---------------------------------------------------------------------------

/// Synthesizes the source envelope and writes `pulse.csv`.
pub fn run_pulse(config: &Config, out_dir: &Path) -> Result<CommandOutcome> {
    let mut report = RunReport::new("pulse", *config);
    let t0 = config.system.t0_ps;
    let grid = single_pulse_grid(config, 0.0)?;
    let envelope = ComplexEnvelope::gaussian(grid, &PulseSpec::new(t0))?;

    let path = out_dir.join("pulse.csv");
    write_envelope_csv(&path, &envelope)?;
    report.record(path);
    Ok(CommandOutcome::success(report))
}

// ---------------------------------------------------------------------------
// compensate
// ---------------------------------------------------------------------------

/// Synthesizes the pre-compensated launch pulse for one arm and writes
/// `precompensated.csv` plus `modulator.csv`.
pub fn run_compensate(
    config: &Config,
    out_dir: &Path,
    arm: Arm,
    dispersion_override_ps2: Option<f64>,
) -> Result<CommandOutcome> {
    let mut report = RunReport::new("compensate", *config);
    let fiber = arm.fiber(config);
    let dispersion = match dispersion_override_ps2 {
        Some(value) => {
            report.note(format!(
                "dispersion override {value} ps² replaces the configured arm value {} ps²",
                fiber.dispersion_ps2()
            ));
            value
        }
        None => fiber.dispersion_ps2(),
    };

    let t0 = config.system.t0_ps;
    let grid = single_pulse_grid(config, dispersion)?;
    let launch = ComplexEnvelope::precompensated_gaussian(grid, &PulseSpec::new(t0), dispersion)?;
    let drives = launch.modulator_drives()?;

    let envelope_path = out_dir.join("precompensated.csv");
    write_envelope_csv(&envelope_path, &launch)?;
    report.record(envelope_path);

    let modulator_path = out_dir.join("modulator.csv");
    write_modulator_csv(&modulator_path, &launch, &drives)?;
    report.record(modulator_path);
    Ok(CommandOutcome::success(report))
}

// ---------------------------------------------------------------------------
// hom
// ---------------------------------------------------------------------------

/// Simulates the two-arm coincidence curve and writes `hom_curve.csv` plus
/// `hom_summary.json`.
pub fn run_hom(config: &Config, out_dir: &Path) -> Result<CommandOutcome> {
    let mut report = RunReport::new("hom", *config);
    let (curve, summary) = simulate_configured_curve(config)?;

    let curve_path = out_dir.join("hom_curve.csv");
    write_curve_csv(&curve_path, &curve)?;
    report.record(curve_path);

    let summary_path = out_dir.join("hom_summary.json");
    write_json(&summary_path, &summary)?;
    report.record(summary_path);
    Ok(CommandOutcome::success(report))
}

/// Runs the configured two-arm interference simulation.
fn simulate_configured_curve(config: &Config) -> Result<(CoincidenceCurve, HomSummary)> {
    let sim = &config.sim;
    let t0 = config.system.t0_ps;
    let dispersion_a = config.fiber_a.dispersion_ps2();
    let dispersion_b = config.fiber_b.dispersion_ps2();

    let grid = match sim.span_ps {
        Some(span) => TimeGrid::new(sim.n_samples, span)?,
        None => hom::interference_grid(sim.n_samples, t0, dispersion_a, dispersion_b)?,
    };
    let source = ComplexEnvelope::gaussian(grid, &PulseSpec::new(t0))?;
    let arm_a = source.propagate(dispersion_a);
    let arm_b = source.propagate(dispersion_b);

    let delays = match (sim.delay_min_ps, sim.delay_max_ps) {
        (Some(min), Some(max)) => linspace(min, max, sim.delay_steps),
        _ => hom::auto_delays(&arm_a, &arm_b, sim.delay_steps)?,
    };
    let mut curve = hom::coincidence_curve(&arm_a, &arm_b, &delays, config.system.v_max)?;
    if let Some(noise) = resolved_noise(config)? {
        curve = curve.with_poisson_noise(noise.mean_counts_per_bin, noise.seed)?;
    }
    let summary = curve.summarize()?;
    Ok((curve, summary))
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

/// Asymmetry estimate derived from one measured coincidence curve.
#[derive(Debug, Serialize)]
struct EstimateReport {
    /// Observable the headline estimate was inverted from.
    route: AsymmetryRoute,
    /// Estimated asymmetry magnitude, in ps².
    alpha_hat_ps2: f64,
    /// The two signed hypotheses consistent with the magnitude.
    alpha_candidates_ps2: [f64; 2],
    /// Width-route estimate, when the measured width admits one.
    alpha_from_fwhm_ps2: Option<f64>,
    /// Visibility-route estimate, when the measured visibility admits one.
    alpha_from_visibility_ps2: Option<f64>,
    /// Summary statistics of the supplied curve.
    summary: HomSummary,
}

/// Estimates the dispersion asymmetry from a curve file and writes
/// `estimate.json`.
pub fn run_estimate(config: &Config, out_dir: &Path, curve_path: &Path) -> Result<CommandOutcome> {
    let mut report = RunReport::new("estimate", *config);
    let curve = read_curve_csv(curve_path)?;
    let summary = curve.summarize()?;

    let ceiling = config.system.v_max;
    let tolerance = match config.sim.counts_per_bin {
        // Allowance matched to the shot noise of the stated statistics.
        Some(counts) => 12.0 / counts.sqrt(),
        None => DEFAULT_CEILING_TOLERANCE,
    };
    if summary.visibility > ceiling + tolerance {
        return Err(CoreError::Domain(format!(
            "measured visibility {:.4} exceeds the source ceiling {ceiling} by more than {tolerance:.4}",
            summary.visibility
        ))
        .into());
    }
    let clamped_visibility = summary.visibility.min(ceiling);
    if clamped_visibility < summary.visibility {
        report.note(format!(
            "visibility {:.6} clamped to the source ceiling {ceiling} for inversion",
            summary.visibility
        ));
    }

    let t0 = config.system.t0_ps;
    let from_fwhm = asymmetry_from_fwhm(summary.fwhm_paper_ps, t0);
    let from_visibility = asymmetry_from_visibility(clamped_visibility, t0);
    let alpha_hat = match config.sim.alpha_route {
        AsymmetryRoute::Fwhm => from_fwhm.clone()?,
        AsymmetryRoute::Visibility => from_visibility.clone()?,
        AsymmetryRoute::Average => (from_fwhm.clone()? + from_visibility.clone()?) / 2.0,
    };
    if let Err(err) = &from_fwhm {
        report.note(format!("width-route estimate unavailable: {err}"));
    }
    if let Err(err) = &from_visibility {
        report.note(format!("visibility-route estimate unavailable: {err}"));
    }

    let estimate = EstimateReport {
        route: config.sim.alpha_route,
        alpha_hat_ps2: alpha_hat,
        alpha_candidates_ps2: [alpha_hat, -alpha_hat],
        alpha_from_fwhm_ps2: from_fwhm.ok(),
        alpha_from_visibility_ps2: from_visibility.ok(),
        summary,
    };
    let path = out_dir.join("estimate.json");
    write_json(&path, &estimate)?;
    report.record(path);
    Ok(CommandOutcome::success(report))
}

/// Parses a `delay_ps,coincidence_norm` file back into a curve.
fn read_curve_csv(path: &Path) -> Result<CoincidenceCurve> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read curve file {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "delay_ps,coincidence_norm" => {}
        Some((_, header)) => bail!(
            "curve file {} must start with 'delay_ps,coincidence_norm', found '{header}'",
            path.display()
        ),
        None => bail!("curve file {} is empty", path.display()),
    }
    let mut delays = Vec::new();
    let mut values = Vec::new();
    for (index, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = || format!("curve file {} line {}", path.display(), index + 1);
        let (delay, value) = line
            .split_once(',')
            .with_context(|| format!("{}: expected two comma-separated fields", row()))?;
        delays.push(
            delay
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{}: invalid delay '{delay}'", row()))?,
        );
        values.push(
            value
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{}: invalid coincidence '{value}'", row()))?,
        );
    }
    Ok(CoincidenceCurve::new(delays, values, 1.0)?)
}

// ---------------------------------------------------------------------------
// protocol
// ---------------------------------------------------------------------------

/// Runs the blind three-phase selection protocol and writes
/// `protocol_report.json` plus `protocol_table.txt`.
///
/// An inconclusive verdict still writes both artifacts and asks for exit
/// code 4.
pub fn run_protocol(config: &Config, out_dir: &Path) -> Result<CommandOutcome> {
    let mut report = RunReport::new("protocol", *config);
    if config.sim.span_ps.is_some() || config.sim.delay_min_ps.is_some() {
        report.note(
            "protocol sizes its grids per phase; sim.span_ps and the delay window are ignored",
        );
    }

    let settings = ProtocolSettings {
        t0_ps: config.system.t0_ps,
        visibility_ceiling: config.system.v_max,
        n_samples: config.sim.n_samples,
        delay_steps: config.sim.delay_steps,
        route: config.sim.alpha_route,
        tie_threshold: config.sim.tie_threshold,
        noise: resolved_noise(config)?,
    };
    let protocol = run_blind_protocol(&config.fiber_a, &config.fiber_b, &settings)?;
    let expected = ExpectedReference::for_source(settings.t0_ps, settings.visibility_ceiling)?;

    let report_path = out_dir.join("protocol_report.json");
    write_json(&report_path, &protocol)?;
    report.record(report_path);

    let table_path = out_dir.join("protocol_table.txt");
    output::write_atomic(&table_path, &render_protocol_table(&protocol, &expected))?;
    report.record(table_path);

    let exit_code = if protocol.selected == Selection::Inconclusive {
        report.note(format!(
            "selection inconclusive: |{:.6} - {:.6}| is within the tie threshold {}",
            protocol.gamma_alice, protocol.gamma_bob, settings.tie_threshold
        ));
        4
    } else {
        0
    };
    Ok(CommandOutcome { report, exit_code })
}

fn selection_label(selection: Selection) -> &'static str {
    match selection {
        Selection::Alice => "alice",
        Selection::Bob => "bob",
        Selection::Inconclusive => "inconclusive",
    }
}

/// Renders the aligned scenario table: expected reference, the phase-0 dip,
/// and the two trial compensations with their deviation metrics.
fn render_protocol_table(protocol: &ProtocolReport, expected: &ExpectedReference) -> String {
    let mut text = format!(
        "{:<24}{:>12}{:>14}{:>14}\n",
        "scenario", "visibility", "fwhm_ps", "gamma"
    );
    let mut row = |scenario: &str, visibility: f64, fwhm: f64, gamma: Option<f64>| {
        let gamma_cell = match gamma {
            Some(value) => format!("{value:>14.6}"),
            None => format!("{:>14}", "-"),
        };
        text.push_str(&format!(
            "{scenario:<24}{visibility:>12.6}{fwhm:>14.4}{gamma_cell}\n"
        ));
    };
    row("expected", expected.visibility, expected.fwhm_ps, None);
    row(
        "uncompensated",
        protocol.summary_uncompensated.visibility,
        protocol.summary_uncompensated.fwhm_paper_ps,
        None,
    );
    row(
        "compensated_at_alice",
        protocol.summary_comp_alice.visibility,
        protocol.summary_comp_alice.fwhm_paper_ps,
        Some(protocol.gamma_alice),
    );
    row(
        "compensated_at_bob",
        protocol.summary_comp_bob.visibility,
        protocol.summary_comp_bob.fwhm_paper_ps,
        Some(protocol.gamma_bob),
    );
    text.push_str(&format!(
        "selected: {}\n",
        selection_label(protocol.selected)
    ));
    text
}

// ---------------------------------------------------------------------------
// keyrate
// ---------------------------------------------------------------------------

/// Sweeps the dispersive-arm length and writes `keyrate_sweep.csv`.
pub fn run_keyrate(
    config: &Config,
    out_dir: &Path,
    length_min_km: f64,
    length_max_km: f64,
    step_km: f64,
    mode: RateMode,
) -> Result<CommandOutcome> {
    let mut report = RunReport::new("keyrate", *config);
    let system = &config.system;
    if config.fiber_b.beta2_ps2_per_km != system.beta2_ps2_per_km {
        report.note(format!(
            "sweep uses system.beta2_ps2_per_km = {} ps²/km; fiber_b declares {} ps²/km",
            system.beta2_ps2_per_km, config.fiber_b.beta2_ps2_per_km
        ));
    }
    if config.fiber_b.loss_db_per_km != system.loss_db_per_km {
        report.note(format!(
            "sweep uses system.loss_db_per_km = {} dB/km; fiber_b declares {} dB/km",
            system.loss_db_per_km, config.fiber_b.loss_db_per_km
        ));
    }

    let points = keyrate::sweep(
        system,
        config.fiber_a.length_km,
        length_min_km,
        length_max_km,
        step_km,
        mode,
    )?;
    let path = out_dir.join("keyrate_sweep.csv");
    write_sweep_csv(&path, &points)?;
    report.record(path);
    Ok(CommandOutcome::success(report))
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Grid for a single-pulse command: the configured span, or one sized for
/// the pulse broadened by `dispersion_ps2`.
fn single_pulse_grid(config: &Config, dispersion_ps2: f64) -> Result<TimeGrid> {
    let grid = match config.sim.span_ps {
        Some(span) => TimeGrid::new(config.sim.n_samples, span)?,
        None => TimeGrid::for_pulse(config.sim.n_samples, config.system.t0_ps, dispersion_ps2)?,
    };
    Ok(grid)
}

/// Resolves the noise block: counting statistics require an explicit seed.
fn resolved_noise(config: &Config) -> Result<Option<NoiseSpec>> {
    match config.sim.counts_per_bin {
        None => Ok(None),
        Some(mean_counts_per_bin) => {
            let Some(seed) = config.sim.seed else {
                bail!(
                    "sim.seed (or --seed) is required when sim.counts_per_bin is set; \
                     noisy runs draw no entropy from the environment"
                );
            };
            Ok(Some(NoiseSpec {
                mean_counts_per_bin,
                seed,
            }))
        }
    }
}

fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    let spacing = (max - min) / (steps - 1) as f64;
    (0..steps).map(|i| min + i as f64 * spacing).collect()
}
