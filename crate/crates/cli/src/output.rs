//! Artifact emission: CSV and JSON writers with atomic replacement.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! a crashed or interrupted run never leaves a half-written artifact. All
//! numeric cells carry 17 significant digits, enough to reconstruct the
//! exact double-precision values in any language.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use dispcomp_core::hom::CoincidenceCurve;
use dispcomp_core::keyrate::RatePoint;
use dispcomp_core::signal::{ComplexEnvelope, ModulatorDrives};

use crate::config::Config;

/// What a subcommand did: the resolved inputs, the files it wrote, and any
/// non-fatal observations. Serialized to stdout as the run's receipt.
#[derive(Debug, Serialize)]
pub struct RunReport {
    /// Subcommand name.
    pub command: String,
    /// Fully resolved configuration, including flag overrides.
    pub inputs: Config,
    /// Paths of every artifact written, in emission order.
    pub outputs: Vec<PathBuf>,
    /// Human-readable warnings and notes; empty on an unremarkable run.
    pub diagnostics: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, inputs: Config) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            outputs: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn record(&mut self, path: PathBuf) {
        self.outputs.push(path);
    }

    pub fn note(&mut self, diagnostic: impl Into<String>) {
        self.diagnostics.push(diagnostic.into());
    }
}

/// Formats one numeric cell with full double precision.
fn cell(value: f64) -> String {
    format!("{value:.16e}")
}

/// Atomically replaces `path` with `contents`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let directory = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(directory) = directory {
        fs::create_dir_all(directory)
            .with_context(|| format!("cannot create output directory {}", directory.display()))?;
    }
    let mut temporary = tempfile::NamedTempFile::new_in(directory.unwrap_or(Path::new(".")))
        .context("cannot create temporary output file")?;
    temporary
        .write_all(contents.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    temporary
        .persist(path)
        .with_context(|| format!("cannot replace {}", path.display()))?;
    Ok(())
}

/// Serializes `value` as pretty JSON (with a trailing newline) to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("cannot serialize JSON")?;
    text.push('\n');
    write_atomic(path, &text)
}

/// Writes a complex envelope as `t_ps,re,im,mag,phase_rad`.
pub fn write_envelope_csv(path: &Path, envelope: &ComplexEnvelope) -> Result<()> {
    let mut text = String::from("t_ps,re,im,mag,phase_rad\n");
    for (t, amplitude) in envelope.grid().times().zip(envelope.amplitude()) {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            cell(t),
            cell(amplitude.re),
            cell(amplitude.im),
            cell(amplitude.norm()),
            cell(amplitude.arg()),
        );
    }
    write_atomic(path, &text)
}

/// Writes modulator drive waveforms as `t_ps,intensity_norm,phase_rad`.
pub fn write_modulator_csv(
    path: &Path,
    envelope: &ComplexEnvelope,
    drives: &ModulatorDrives,
) -> Result<()> {
    let mut text = String::from("t_ps,intensity_norm,phase_rad\n");
    let rows = envelope
        .grid()
        .times()
        .zip(drives.intensity_norm.iter().zip(&drives.phase_rad));
    for (t, (&intensity, &phase)) in rows {
        let _ = writeln!(text, "{},{},{}", cell(t), cell(intensity), cell(phase));
    }
    write_atomic(path, &text)
}

/// Writes a coincidence curve as `delay_ps,coincidence_norm`.
pub fn write_curve_csv(path: &Path, curve: &CoincidenceCurve) -> Result<()> {
    let mut text = String::from("delay_ps,coincidence_norm\n");
    for (delay, value) in curve.delays_ps().iter().zip(curve.coincidence()) {
        let _ = writeln!(text, "{},{}", cell(*delay), cell(*value));
    }
    write_atomic(path, &text)
}

/// Writes a key-rate sweep as
/// `length_km,skr_uncompensated,skr_compensated,visibility_uncompensated,e11x_uncompensated`.
pub fn write_sweep_csv(path: &Path, points: &[RatePoint]) -> Result<()> {
    let mut text = String::from(
        "length_km,skr_uncompensated,skr_compensated,visibility_uncompensated,e11x_uncompensated\n",
    );
    for point in points {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            cell(point.length_km),
            cell(point.skr_uncompensated),
            cell(point.skr_compensated),
            cell(point.visibility_uncompensated),
            cell(point.e11x_uncompensated),
        );
    }
    write_atomic(path, &text)
}
