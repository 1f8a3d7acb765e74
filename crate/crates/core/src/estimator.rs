//! Dispersion-asymmetry estimation and the blind compensation-selection
//! protocol.
//!
//! The measurement node cannot see the fibre parameters of either arm; it
//! only sees coincidence curves. This module turns a measured dip into an
//! estimate of the dispersion asymmetry `α = D_A − D_B` between the arms
//! (by inverting the closed-form visibility or width relations), scores how
//! far a dip sits from its dispersion-free expectation with a single scalar
//! metric, and orchestrates the three-phase protocol that decides *which*
//! party should pre-compensate — all without revealing fibre lengths or
//! dispersion coefficients to anyone.
//!
//! The protocol:
//!
//! 1. **Phase 0** — both parties send plain Gaussian references; the dip
//!    yields `|α̂|` (the sign is unobservable: the dip depends on `α²`).
//! 2. **Phase 1** — Alice sends the closed-form pre-compensated pulse built
//!    for `α̂`, Bob stays plain.
//! 3. **Phase 2** — the roles are swapped.
//!
//! The deviation metric is computed for phases 1 and 2 against the
//! dispersion-free reference, and the side with the strictly smaller metric
//! wins; nearly equal metrics are declared inconclusive. A magnitude-only
//! estimate suffices because the two phases structurally probe the two sign
//! hypotheses: pre-compensating with `+α̂` cancels the asymmetry exactly when
//! applied on the arm that is short by `α̂`, and doubles it on the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{
    analytic_fwhm, auto_delays, coincidence_curve, interference_grid, HomSummary,
    COHERENT_VISIBILITY_CEILING, MIN_SUMMARY_SAMPLES,
};
use crate::signal::{ComplexEnvelope, FiberSpec, PulseSpec, TimeGrid};

/// Tolerated relative shortfall of `d²·ln 2` against the zero-asymmetry
/// floor `8T₀²` before [`asymmetry_from_fwhm`] reports a domain error: a
/// width quoted to four decimal places can sit up to ~2e-6 (relative) below
/// the exact floor without being inconsistent, so the slack stays an order
/// of magnitude above that and far below any physical asymmetry.
const FWHM_FLOOR_SLACK: f64 = 1e-5;

/// Dispersion-free dip parameters a perfectly compensated pair must
/// reproduce: the source-statistics visibility ceiling and the
/// zero-asymmetry dip width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedReference {
    /// Expected dip visibility — the source ceiling.
    pub visibility: f64,
    /// Expected dip width (half-depth width over ln 2), in ps.
    pub fwhm_ps: f64,
}

impl ExpectedReference {
    /// Reference for Gaussian pulses of width `t0_ps` on a source whose dip
    /// visibility caps at `visibility_ceiling`.
    pub fn for_source(t0_ps: f64, visibility_ceiling: f64) -> Result<Self> {
        if !(visibility_ceiling > 0.0 && visibility_ceiling <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "visibility ceiling must lie in (0, 1], got {visibility_ceiling}"
            )));
        }
        Ok(Self {
            visibility: visibility_ceiling,
            fwhm_ps: analytic_fwhm(t0_ps, 0.0)?,
        })
    }
}

/// Inverts the closed-form visibility relation: for a dip visibility `V`
/// (coherent-source normalization, so `V ∈ (0, 1/2]`) of Gaussian pulses of
/// width `t0_ps`, the asymmetry magnitude is `|α| = T₀²·√(1/V² − 4)`.
///
/// Visibilities above the coherent ceiling or at/below zero are outside the
/// model and produce a domain error.
pub fn asymmetry_from_visibility(visibility: f64, t0_ps: f64) -> Result<f64> {
    if !(t0_ps.is_finite() && t0_ps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pulse width must be positive and finite, got {t0_ps} ps"
        )));
    }
    if !visibility.is_finite() || visibility <= 0.0 || visibility > COHERENT_VISIBILITY_CEILING {
        return Err(Error::Domain(format!(
            "visibility {visibility} is outside the invertible range (0, {COHERENT_VISIBILITY_CEILING}]"
        )));
    }
    let inverse_sq = 1.0 / (visibility * visibility);
    Ok(t0_ps * t0_ps * (inverse_sq - 4.0).max(0.0).sqrt())
}

/// Inverts the closed-form width relation: for a dip width `fwhm_paper_ps`
/// (half-depth width over ln 2) of Gaussian pulses of width `t0_ps`, the
/// asymmetry magnitude is `|α| = T₀·√((d²·ln 2 − 8T₀²)/2)`.
///
/// Widths below the zero-asymmetry floor `√(8T₀²/ln 2)` are outside the
/// model; a shortfall within rounding of the floor clamps to zero instead.
pub fn asymmetry_from_fwhm(fwhm_paper_ps: f64, t0_ps: f64) -> Result<f64> {
    if !(t0_ps.is_finite() && t0_ps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pulse width must be positive and finite, got {t0_ps} ps"
        )));
    }
    if !(fwhm_paper_ps.is_finite() && fwhm_paper_ps > 0.0) {
        return Err(Error::Domain(format!(
            "dip width must be positive, got {fwhm_paper_ps} ps"
        )));
    }
    let floor = 8.0 * t0_ps * t0_ps;
    let excess = fwhm_paper_ps * fwhm_paper_ps * std::f64::consts::LN_2 - floor;
    if excess < -FWHM_FLOOR_SLACK * floor {
        return Err(Error::Domain(format!(
            "dip width {fwhm_paper_ps} ps is below the zero-asymmetry floor {:.4} ps",
            (floor / std::f64::consts::LN_2).sqrt()
        )));
    }
    Ok(t0_ps * (excess.max(0.0) / 2.0).sqrt())
}

/// Scalar deviation of a measured dip from its dispersion-free expectation:
/// the product of the absolute width and visibility deviations,
/// `|fwhm − fwhm_expected| · |V − V_expected|`.
///
/// Zero means the dip is indistinguishable from the compensated ideal; the
/// product form makes the metric insensitive to a small error in one
/// coordinate when the other matches.
pub fn selection_metric(summary: &HomSummary, expected: &ExpectedReference) -> f64 {
    (summary.fwhm_paper_ps - expected.fwhm_ps).abs()
        * (summary.visibility - expected.visibility).abs()
}

/// Which dip observable the asymmetry estimate is inverted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsymmetryRoute {
    /// Invert the dip width (default: widths degrade more slowly with
    /// counting noise than the dip minimum does).
    #[default]
    Fwhm,
    /// Invert the dip visibility.
    Visibility,
    /// Average the two inversions.
    Average,
}

/// Poisson counting noise applied to every simulated coincidence curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Mean number of coincidence counts per delay bin at the baseline.
    pub mean_counts_per_bin: f64,
    /// Base RNG seed; each protocol phase offsets it by its phase index.
    pub seed: u64,
}

/// Tunable knobs of [`run_blind_protocol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSettings {
    /// Source pulse width, in ps.
    pub t0_ps: f64,
    /// Source-statistics dip ceiling (1/2 for phase-averaged coherent
    /// pulses).
    pub visibility_ceiling: f64,
    /// Samples per simulation grid (power of two, at least 16).
    pub n_samples: usize,
    /// Delay samples per coincidence curve (at least
    /// [`MIN_SUMMARY_SAMPLES`]; odd counts center a sample on zero delay).
    pub delay_steps: usize,
    /// Observable the asymmetry estimate is taken from.
    pub route: AsymmetryRoute,
    /// Metric difference below which the selection is inconclusive.
    pub tie_threshold: f64,
    /// Counting noise; `None` simulates noiseless curves.
    pub noise: Option<NoiseSpec>,
}

impl ProtocolSettings {
    /// Default protocol for a source of width `t0_ps`: coherent ceiling,
    /// 4096-sample grids, 201 delay steps, width-route estimation, a tie
    /// threshold of 0.05, and no noise.
    pub fn new(t0_ps: f64) -> Self {
        Self {
            t0_ps,
            visibility_ceiling: COHERENT_VISIBILITY_CEILING,
            n_samples: 4096,
            delay_steps: 201,
            route: AsymmetryRoute::default(),
            tie_threshold: 0.05,
            noise: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0_ps.is_finite() && self.t0_ps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pulse width must be positive and finite, got {} ps",
                self.t0_ps
            )));
        }
        if !(self.visibility_ceiling > 0.0 && self.visibility_ceiling <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "visibility ceiling must lie in (0, 1], got {}",
                self.visibility_ceiling
            )));
        }
        if self.n_samples < 16 || !self.n_samples.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid length must be a power of two >= 16, got {}",
                self.n_samples
            )));
        }
        if self.delay_steps < MIN_SUMMARY_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "the protocol needs at least {MIN_SUMMARY_SAMPLES} delay steps, got {}",
                self.delay_steps
            )));
        }
        if !(self.tie_threshold.is_finite() && self.tie_threshold >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tie threshold must be non-negative, got {}",
                self.tie_threshold
            )));
        }
        if let Some(noise) = self.noise {
            if !(noise.mean_counts_per_bin.is_finite() && noise.mean_counts_per_bin > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "mean counts per bin must be positive, got {}",
                    noise.mean_counts_per_bin
                )));
            }
        }
        Ok(())
    }

    /// Visibility slack above the ceiling before a measurement is declared
    /// inconsistent: tight for noiseless curves, scaled to the Poisson
    /// fluctuation of the dip minimum for counted ones.
    fn ceiling_tolerance(&self) -> f64 {
        match self.noise {
            Some(noise) => 12.0 / noise.mean_counts_per_bin.sqrt(),
            None => 1e-6,
        }
    }
}

/// Which party the protocol instructs to apply pre-compensation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Alice (the `fiber_a` party) should pre-compensate.
    Alice,
    /// Bob (the `fiber_b` party) should pre-compensate.
    Bob,
    /// The metrics are too close to call; neither side is instructed.
    Inconclusive,
}

/// Everything the three protocol phases measured and decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    /// Estimated asymmetry magnitude `|α̂|`, in ps².
    pub alpha_hat_ps2: f64,
    /// The two signed asymmetry hypotheses the phases probed.
    pub alpha_candidates_ps2: [f64; 2],
    /// Phase 0 dip: both parties plain.
    pub summary_uncompensated: HomSummary,
    /// Phase 1 dip: Alice pre-compensated.
    pub summary_comp_alice: HomSummary,
    /// Phase 2 dip: Bob pre-compensated.
    pub summary_comp_bob: HomSummary,
    /// Deviation metric of the phase 1 dip.
    pub gamma_alice: f64,
    /// Deviation metric of the phase 2 dip.
    pub gamma_bob: f64,
    /// The protocol's verdict.
    pub selected: Selection,
}

/// Runs the three-phase blind compensation-selection protocol for the given
/// arms and settings.
///
/// Identical inputs (including the noise seed) produce an identical report.
/// Estimation failures in any phase propagate, and a phase whose measured
/// visibility exceeds the source ceiling beyond the noise allowance aborts
/// with a diagnostic.
pub fn run_blind_protocol(
    fiber_a: &FiberSpec,
    fiber_b: &FiberSpec,
    settings: &ProtocolSettings,
) -> Result<ProtocolReport> {
    fiber_a.validate()?;
    fiber_b.validate()?;
    settings.validate()?;
    let dispersion_a = fiber_a.dispersion_ps2();
    let dispersion_b = fiber_b.dispersion_ps2();
    let expected = ExpectedReference::for_source(settings.t0_ps, settings.visibility_ceiling)?;

    let summary_uncompensated = simulate_phase(settings, 0.0, 0.0, dispersion_a, dispersion_b, 0)?;

    // Re-expressed at the coherent ceiling so the inversion formulas apply
    // for any configured source ceiling; the phase gate has already bounded
    // the measurement, so residual noise above the ceiling clamps to it.
    let normalized_visibility = (COHERENT_VISIBILITY_CEILING * summary_uncompensated.visibility
        / settings.visibility_ceiling)
        .min(COHERENT_VISIBILITY_CEILING);
    let alpha_hat = match settings.route {
        AsymmetryRoute::Fwhm => {
            asymmetry_from_fwhm(summary_uncompensated.fwhm_paper_ps, settings.t0_ps)?
        }
        AsymmetryRoute::Visibility => {
            asymmetry_from_visibility(normalized_visibility, settings.t0_ps)?
        }
        AsymmetryRoute::Average => {
            let from_width =
                asymmetry_from_fwhm(summary_uncompensated.fwhm_paper_ps, settings.t0_ps)?;
            let from_visibility = asymmetry_from_visibility(normalized_visibility, settings.t0_ps)?;
            0.5 * (from_width + from_visibility)
        }
    };

    let summary_comp_alice =
        simulate_phase(settings, alpha_hat, 0.0, dispersion_a, dispersion_b, 1)?;
    let summary_comp_bob = simulate_phase(settings, 0.0, alpha_hat, dispersion_a, dispersion_b, 2)?;
    let gamma_alice = selection_metric(&summary_comp_alice, &expected);
    let gamma_bob = selection_metric(&summary_comp_bob, &expected);

    let selected = if (gamma_alice - gamma_bob).abs() <= settings.tie_threshold {
        Selection::Inconclusive
    } else if gamma_alice < gamma_bob {
        Selection::Alice
    } else {
        Selection::Bob
    };

    Ok(ProtocolReport {
        alpha_hat_ps2: alpha_hat,
        alpha_candidates_ps2: [alpha_hat, -alpha_hat],
        summary_uncompensated,
        summary_comp_alice,
        summary_comp_bob,
        gamma_alice,
        gamma_bob,
        selected,
    })
}

/// Simulates one protocol phase end to end: synthesize the two launches
/// (plain or pre-compensated), propagate each through its arm, sample the
/// coincidence curve over an auto-calibrated delay window, optionally apply
/// counting noise, and summarize the dip.
fn simulate_phase(
    settings: &ProtocolSettings,
    precomp_a_ps2: f64,
    precomp_b_ps2: f64,
    dispersion_a_ps2: f64,
    dispersion_b_ps2: f64,
    phase_index: u64,
) -> Result<HomSummary> {
    let spec = PulseSpec::new(settings.t0_ps);
    // The grid must hold each pulse at its widest, which is either the
    // chirped launch or the arrival, whichever excursion is larger.
    let grid = interference_grid(
        settings.n_samples,
        settings.t0_ps,
        dominant_excursion(precomp_a_ps2, dispersion_a_ps2),
        dominant_excursion(precomp_b_ps2, dispersion_b_ps2),
    )?;
    let arrival_a = launch(grid, &spec, precomp_a_ps2)?.propagate(dispersion_a_ps2);
    let arrival_b = launch(grid, &spec, precomp_b_ps2)?.propagate(dispersion_b_ps2);
    let delays = auto_delays(&arrival_a, &arrival_b, settings.delay_steps)?;
    let mut curve =
        coincidence_curve(&arrival_a, &arrival_b, &delays, settings.visibility_ceiling)?;
    if let Some(noise) = settings.noise {
        curve = curve.with_poisson_noise(
            noise.mean_counts_per_bin,
            noise.seed.wrapping_add(phase_index),
        )?;
    }
    let summary = curve.summarize()?;
    if summary.visibility > settings.visibility_ceiling + settings.ceiling_tolerance() {
        return Err(Error::Estimation(format!(
            "measured visibility {:.4} exceeds the source ceiling {:.4}; \
             the curve is inconsistent with the interference model",
            summary.visibility, settings.visibility_ceiling
        )));
    }
    Ok(summary)
}

fn launch(grid: TimeGrid, spec: &PulseSpec, precomp_ps2: f64) -> Result<ComplexEnvelope> {
    if precomp_ps2 == 0.0 {
        ComplexEnvelope::gaussian(grid, spec)
    } else {
        ComplexEnvelope::precompensated_gaussian(grid, spec, precomp_ps2)
    }
}

/// The dispersion excursion that dominates a pulse's width over its journey:
/// the pre-compensation at launch or the residual at arrival.
fn dominant_excursion(precomp_ps2: f64, dispersion_ps2: f64) -> f64 {
    let residual = dispersion_ps2 - precomp_ps2;
    if precomp_ps2.abs() > residual.abs() {
        precomp_ps2
    } else {
        residual
    }
}
