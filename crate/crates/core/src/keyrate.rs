//! Secret-key-rate model for an asymmetric two-arm time-bin link.
//!
//! The chain in this module runs from interference quality to key bits:
//!
//! 1. [`singlet_probability`] enumerates the relay's beam-splitter outcomes
//!    for the four equatorial input pairs, once with full two-photon
//!    interference and once with the photons fully distinguishable.
//! 2. [`mixed_singlet_probability`] blends the two regimes with a caller
//!    supplied weight, and [`x_basis_error_rate`] converts the blend into
//!    the check-basis error rate observed by the protocol.
//! 3. [`channel_gains`] applies a transparent detector-and-loss model to
//!    produce the gain and error figures of a concrete link.
//! 4. [`secret_key_rate`] evaluates the rate formula for those figures, and
//!    [`sweep`] repeats the evaluation across a range of dispersive-arm
//!    lengths, carrying a chirp-compensated and an uncompensated branch
//!    side by side.
//!
//! The gain model is a deliberately simple stand-in: threshold detectors
//! whose efficiency is folded into the channel transmission, plus a flat
//! dark-count floor. It is meant for comparing the compensated and
//! uncompensated branches of the *same* link under identical loss, not for
//! absolute rate predictions.
//!
//! # Units
//!
//! Arm lengths are kilometres, pulse widths picoseconds, and dispersion
//! ps²/km, matching [`crate::signal`]. Rates are bits per pulse.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom;

/// Relative slack accepted above the visibility ceiling in
/// [`channel_gains`], absorbing rounding in visibilities that were computed
/// at the ceiling itself.
const VISIBILITY_SLACK: f64 = 1e-9;

/// Relative slack accepted in the gain-ordering check of
/// [`Gains::validate`], absorbing rounding in gains that are mathematically
/// equal (for example when the dark-count floor is zero).
const GAIN_ORDER_SLACK: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Binary entropy
// ---------------------------------------------------------------------------

/// Binary Shannon entropy in bits.
///
/// `h(p) = -p log2 p - (1-p) log2 (1-p)`, with the limit convention
/// `h(0) = h(1) = 0`.
///
/// # Errors
///
/// [`Error::Domain`] if `probability` is outside `[0, 1]` or not finite.
pub fn binary_entropy(probability: f64) -> Result<f64> {
    check_unit_interval("probability", probability)?;
    if probability == 0.0 || probability == 1.0 {
        return Ok(0.0);
    }
    let complement = 1.0 - probability;
    Ok(-probability * probability.log2() - complement * complement.log2())
}

// ---------------------------------------------------------------------------
// Relay outcome enumeration
// ---------------------------------------------------------------------------

/// Joint state of the two equatorial (X-basis) qubits meeting at the relay.
///
/// Each sender prepares a superposition of an early and a late time bin with
/// equal weight; the label records the sign of each late-bin component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XBasisPair {
    /// Both late-bin components positive.
    PlusPlus,
    /// Reference-arm positive, dispersive-arm negative.
    PlusMinus,
    /// Reference-arm negative, dispersive-arm positive.
    MinusPlus,
    /// Both late-bin components negative.
    MinusMinus,
}

impl XBasisPair {
    /// All four pairs, in a fixed enumeration order.
    pub const ALL: [Self; 4] = [
        Self::PlusPlus,
        Self::PlusMinus,
        Self::MinusPlus,
        Self::MinusMinus,
    ];

    /// Late-bin signs of the two photons, reference arm first.
    pub fn signs(self) -> (f64, f64) {
        match self {
            Self::PlusPlus => (1.0, 1.0),
            Self::PlusMinus => (1.0, -1.0),
            Self::MinusPlus => (-1.0, 1.0),
            Self::MinusMinus => (-1.0, -1.0),
        }
    }

    /// Whether both senders prepared the same equatorial state.
    pub fn is_same_state(self) -> bool {
        matches!(self, Self::PlusPlus | Self::MinusMinus)
    }
}

/// How the two photons combine on the relay's balanced beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceRegime {
    /// Indistinguishable photons: output amplitudes add coherently.
    Interfering,
    /// Photons distinguishable in some degree of freedom: outcome
    /// probabilities route independently with no interference term.
    NonInterfering,
}

/// Number of relay output modes: two detectors times two time bins.
const RELAY_MODES: usize = 4;

fn relay_detector(mode: usize) -> usize {
    mode / 2
}

fn relay_bin(mode: usize) -> usize {
    mode % 2
}

/// Whether a pair of occupied output modes carries the singlet signature:
/// clicks on different detectors in different time bins.
fn is_singlet_signature(mode_a: usize, mode_b: usize) -> bool {
    relay_detector(mode_a) != relay_detector(mode_b) && relay_bin(mode_a) != relay_bin(mode_b)
}

/// Single-photon amplitudes from an input port to each relay output mode.
///
/// The balanced splitter maps the reference-arm port (0) to both detectors
/// with sign `+`, and the dispersive-arm port (1) with a sign flip on the
/// second detector; the time bin passes through unchanged.
fn relay_amplitudes(port: usize, late_sign: f64) -> [f64; RELAY_MODES] {
    let bin_amplitude = [FRAC_1_SQRT_2, late_sign * FRAC_1_SQRT_2];
    let mut amplitudes = [0.0; RELAY_MODES];
    for (mode, slot) in amplitudes.iter_mut().enumerate() {
        let detector_sign = if port == 1 && relay_detector(mode) == 1 {
            -1.0
        } else {
            1.0
        };
        *slot = bin_amplitude[relay_bin(mode)] * detector_sign * FRAC_1_SQRT_2;
    }
    amplitudes
}

/// Probability that an input pair produces the singlet detection signature.
///
/// Both regimes are computed by direct enumeration over the relay's output
/// configurations rather than from closed forms. In the interfering regime
/// the two-photon amplitude into an unordered mode pair is the symmetrized
/// product of single-photon amplitudes (with the bosonic `sqrt(2)`
/// enhancement when both photons bunch into one mode); in the
/// non-interfering regime every photon routes independently and
/// probabilities multiply.
///
/// The resulting values are `0` for same-state pairs and `1/2` for
/// opposite-state pairs when interfering, and `1/4` for every pair when not.
pub fn singlet_probability(pair: XBasisPair, regime: InterferenceRegime) -> f64 {
    match regime {
        InterferenceRegime::Interfering => interfering_singlet_probability(pair),
        InterferenceRegime::NonInterfering => non_interfering_singlet_probability(pair),
    }
}

fn interfering_singlet_probability(pair: XBasisPair) -> f64 {
    let (sign_a, sign_b) = pair.signs();
    let from_a = relay_amplitudes(0, sign_a);
    let from_b = relay_amplitudes(1, sign_b);
    let mut probability = 0.0;
    for mode_a in 0..RELAY_MODES {
        for mode_b in mode_a..RELAY_MODES {
            if !is_singlet_signature(mode_a, mode_b) {
                continue;
            }
            // Unordered pair of distinct modes; the bunched (equal-mode) case
            // never carries the signature, so only the symmetrized cross term
            // contributes here. The bosonic factor is kept for completeness.
            let amplitude = if mode_a == mode_b {
                SQRT_2 * from_a[mode_a] * from_b[mode_a]
            } else {
                from_a[mode_a] * from_b[mode_b] + from_a[mode_b] * from_b[mode_a]
            };
            probability += amplitude * amplitude;
        }
    }
    probability
}

fn non_interfering_singlet_probability(pair: XBasisPair) -> f64 {
    let (sign_a, sign_b) = pair.signs();
    let bin_probabilities = |late_sign: f64| -> [f64; 2] {
        let amplitude = [FRAC_1_SQRT_2, late_sign * FRAC_1_SQRT_2];
        [amplitude[0] * amplitude[0], amplitude[1] * amplitude[1]]
    };
    let bins_a = bin_probabilities(sign_a);
    let bins_b = bin_probabilities(sign_b);
    let mut probability = 0.0;
    for (bin_a, &weight_a) in bins_a.iter().enumerate() {
        for detector_a in 0..2 {
            for (bin_b, &weight_b) in bins_b.iter().enumerate() {
                for detector_b in 0..2 {
                    if detector_a == detector_b || bin_a == bin_b {
                        continue;
                    }
                    // Each photon picks its bin with the prepared weight and
                    // its detector with probability 1/2, independently.
                    probability += weight_a * 0.5 * weight_b * 0.5;
                }
            }
        }
    }
    probability
}

/// Singlet-signature probability for partially distinguishable photons.
///
/// `weight` interpolates linearly between the non-interfering (`0`) and the
/// fully interfering (`1`) regime.
///
/// # Errors
///
/// [`Error::Domain`] if `weight` is outside `[0, 1]` or not finite.
pub fn mixed_singlet_probability(weight: f64, pair: XBasisPair) -> Result<f64> {
    check_unit_interval("interference weight", weight)?;
    let interfering = singlet_probability(pair, InterferenceRegime::Interfering);
    let non_interfering = singlet_probability(pair, InterferenceRegime::NonInterfering);
    Ok(weight * interfering + (1.0 - weight) * non_interfering)
}

/// Check-basis error rate implied by partial interference plus misalignment.
///
/// The interference contribution is computed structurally: it is the share
/// of singlet signatures that come from same-state input pairs, which a
/// decoder counts as errors. An independent misalignment error
/// `alignment_error` then flips outcomes symmetrically.
///
/// # Errors
///
/// [`Error::Domain`] if `indistinguishability` is outside `[0, 1]` or
/// `alignment_error` is outside `[0, 0.5)`.
pub fn x_basis_error_rate(indistinguishability: f64, alignment_error: f64) -> Result<f64> {
    check_unit_interval("indistinguishability", indistinguishability)?;
    check_alignment_error(alignment_error)?;
    let mut same_state = 0.0;
    let mut total = 0.0;
    for pair in XBasisPair::ALL {
        let probability = mixed_singlet_probability(indistinguishability, pair)?;
        total += probability;
        if pair.is_same_state() {
            same_state += probability;
        }
    }
    let mixing_error = same_state / total;
    Ok(mixing_error + alignment_error * (1.0 - 2.0 * mixing_error))
}

// ---------------------------------------------------------------------------
// System parameters and gains
// ---------------------------------------------------------------------------

/// Source, detector, and security parameters of the modelled link.
///
/// The [`Default`] values describe the worked link used throughout this
/// crate: balanced mean photon numbers of 0.5, detector efficiency 0.145,
/// a dark-count probability of 3·10⁻⁶ per gate, 1.5% misalignment,
/// error-correction efficiency 1.14, security parameters of 10⁻¹⁵, fiber
/// loss of 0.2 dB/km, a 20 ps source, and 20 ps²/km dispersion with a 0.5
/// visibility ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Mean photon number of the reference-arm source.
    pub mu_a: f64,
    /// Mean photon number of the dispersive-arm source.
    pub mu_b: f64,
    /// Detector efficiency, in `(0, 1]`.
    pub eta_det: f64,
    /// Dark-count probability per detector per gate, in `[0, 1)`.
    pub p_dark: f64,
    /// Misalignment error probability, in `[0, 0.5)`.
    pub e_align: f64,
    /// Error-correction inefficiency factor, at least 1.
    pub f_ec: f64,
    /// Correctness failure parameter, in `(0, 1)`.
    pub eps_cor: f64,
    /// Secrecy failure parameter, in `(0, 1)`.
    pub eps_sec: f64,
    /// Fiber attenuation in dB/km, non-negative.
    pub loss_db_per_km: f64,
    /// Source pulse width in ps (same convention as [`crate::signal`]).
    pub t0_ps: f64,
    /// Group-velocity-dispersion coefficient of the swept arm, in ps²/km.
    pub beta2_ps2_per_km: f64,
    /// Ceiling on interference visibility, in `(0, 1]`; `0.5` for
    /// phase-averaged weak coherent sources.
    pub v_max: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            mu_a: 0.5,
            mu_b: 0.5,
            eta_det: 0.145,
            p_dark: 3e-6,
            e_align: 0.015,
            f_ec: 1.14,
            eps_cor: 1e-15,
            eps_sec: 1e-15,
            loss_db_per_km: 0.2,
            t0_ps: 20.0,
            beta2_ps2_per_km: 20.0,
            v_max: 0.5,
        }
    }
}

impl SystemParams {
    /// Checks every field against its documented range.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidInput`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        check_positive_finite("mu_a", self.mu_a)?;
        check_positive_finite("mu_b", self.mu_b)?;
        if !self.eta_det.is_finite() || self.eta_det <= 0.0 || self.eta_det > 1.0 {
            return Err(Error::InvalidInput(format!(
                "eta_det must lie in (0, 1], got {}",
                self.eta_det
            )));
        }
        if !self.p_dark.is_finite() || !(0.0..1.0).contains(&self.p_dark) {
            return Err(Error::InvalidInput(format!(
                "p_dark must lie in [0, 1), got {}",
                self.p_dark
            )));
        }
        if !self.e_align.is_finite() || !(0.0..0.5).contains(&self.e_align) {
            return Err(Error::InvalidInput(format!(
                "e_align must lie in [0, 0.5), got {}",
                self.e_align
            )));
        }
        if !self.f_ec.is_finite() || self.f_ec < 1.0 {
            return Err(Error::InvalidInput(format!(
                "f_ec must be at least 1, got {}",
                self.f_ec
            )));
        }
        for (name, value) in [("eps_cor", self.eps_cor), ("eps_sec", self.eps_sec)] {
            if !value.is_finite() || value <= 0.0 || value >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1), got {value}"
                )));
            }
        }
        if !self.loss_db_per_km.is_finite() || self.loss_db_per_km < 0.0 {
            return Err(Error::InvalidInput(format!(
                "loss_db_per_km must be non-negative, got {}",
                self.loss_db_per_km
            )));
        }
        check_positive_finite("t0_ps", self.t0_ps)?;
        if !self.beta2_ps2_per_km.is_finite() {
            return Err(Error::InvalidInput(format!(
                "beta2_ps2_per_km must be finite, got {}",
                self.beta2_ps2_per_km
            )));
        }
        if !self.v_max.is_finite() || self.v_max <= 0.0 || self.v_max > 1.0 {
            return Err(Error::InvalidInput(format!(
                "v_max must lie in (0, 1], got {}",
                self.v_max
            )));
        }
        Ok(())
    }
}

/// Gain and error figures of one evaluated link configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    /// Gain of single-photon-pair events in the key basis.
    pub q_z11: f64,
    /// Total key-basis gain over all photon-number contributions.
    pub q_z_mu_sigma: f64,
    /// Total key-basis error rate.
    pub e_z_mu_sigma: f64,
    /// Single-photon-pair error rate in the check basis.
    pub e11_x: f64,
}

impl Gains {
    /// Checks that every figure is a probability and that the single-photon
    /// gain does not exceed the total gain.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidInput`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("q_z11", self.q_z11),
            ("q_z_mu_sigma", self.q_z_mu_sigma),
            ("e_z_mu_sigma", self.e_z_mu_sigma),
            ("e11_x", self.e11_x),
        ] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in [0, 1], got {value}"
                )));
            }
        }
        if self.q_z11 > self.q_z_mu_sigma * (1.0 + GAIN_ORDER_SLACK) {
            return Err(Error::InvalidInput(format!(
                "q_z11 ({}) exceeds q_z_mu_sigma ({})",
                self.q_z11, self.q_z_mu_sigma
            )));
        }
        Ok(())
    }
}

/// Evaluates the transparent gain model for one link configuration.
///
/// Each arm's transmission is the detector efficiency attenuated by its
/// fiber span; pair emission follows Poissonian photon-number statistics at
/// the configured mean photon numbers. Dark counts add a flat floor of two
/// opportunities per gate. The check-basis error rate couples in through
/// the supplied interference `visibility`, normalized by the ceiling
/// [`SystemParams::v_max`].
///
/// # Errors
///
/// - [`Error::InvalidInput`] for invalid parameters or negative lengths.
/// - [`Error::Domain`] if `visibility` is outside `(0, v_max]`.
pub fn channel_gains(
    params: &SystemParams,
    length_a_km: f64,
    length_b_km: f64,
    visibility: f64,
) -> Result<Gains> {
    params.validate()?;
    check_length("length_a_km", length_a_km)?;
    check_length("length_b_km", length_b_km)?;
    if !visibility.is_finite()
        || visibility <= 0.0
        || visibility > params.v_max * (1.0 + VISIBILITY_SLACK)
    {
        return Err(Error::Domain(format!(
            "visibility must lie in (0, {}], got {visibility}",
            params.v_max
        )));
    }
    let indistinguishability = (visibility / params.v_max).min(1.0);

    let transmission_a = arm_transmission(params, length_a_km);
    let transmission_b = arm_transmission(params, length_b_km);
    let pair_emission = params.mu_a * params.mu_b * (-params.mu_a - params.mu_b).exp();
    let dark_floor = 2.0 * params.p_dark;

    let signal = 0.5 * pair_emission * transmission_a * transmission_b;
    let q_z_mu_sigma = signal + dark_floor;
    let q_z11 = pair_emission * (0.5 * transmission_a * transmission_b + dark_floor);
    // Misaligned signal detections and half of the (random) dark detections
    // land in the wrong key bin.
    let e_z_mu_sigma = (params.e_align * signal + params.p_dark) / q_z_mu_sigma;
    let e11_x = x_basis_error_rate(indistinguishability, params.e_align)?;

    Ok(Gains {
        q_z11,
        q_z_mu_sigma,
        e_z_mu_sigma,
        e11_x,
    })
}

fn arm_transmission(params: &SystemParams, length_km: f64) -> f64 {
    params.eta_det * 10f64.powf(-params.loss_db_per_km * length_km / 10.0)
}

// ---------------------------------------------------------------------------
// Rate evaluation
// ---------------------------------------------------------------------------

/// Which variant of the rate formula to evaluate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// Full finite-security expression, including the per-pulse penalty
    /// terms for correctness and secrecy failure.
    Verbatim,
    /// Asymptotic expression with the penalty terms dropped.
    #[default]
    Asymptotic,
}

/// A secret-key-rate value in bits per pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRate {
    /// Value of the rate formula; may be negative when the link yields no
    /// key.
    pub raw: f64,
    /// `raw` clamped at zero.
    pub clamped: f64,
}

impl KeyRate {
    fn from_raw(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.max(0.0),
        }
    }
}

/// Evaluates the secret-key rate for one set of gains.
///
/// The single-photon contribution `q_z11 · (1 − h(e11_x))` is reduced by the
/// error-correction cost `f_ec · q_z_mu_sigma · h(e_z_mu_sigma)`; in
/// [`RateMode::Verbatim`] the finite-security penalty
/// `log2(8/eps_cor) + 2·log2(2/eps_sec)` is subtracted as well.
///
/// # Errors
///
/// [`Error::InvalidInput`] if the parameters or gains fail validation.
pub fn secret_key_rate(gains: &Gains, params: &SystemParams, mode: RateMode) -> Result<KeyRate> {
    params.validate()?;
    gains.validate()?;
    let entropy_x = binary_entropy(gains.e11_x)?;
    let entropy_z = binary_entropy(gains.e_z_mu_sigma)?;
    let base = gains.q_z11 * (1.0 - entropy_x) - params.f_ec * gains.q_z_mu_sigma * entropy_z;
    let raw = match mode {
        RateMode::Asymptotic => base,
        RateMode::Verbatim => base - security_penalty_bits(params),
    };
    Ok(KeyRate::from_raw(raw))
}

fn security_penalty_bits(params: &SystemParams) -> f64 {
    (8.0 / params.eps_cor).log2() + 2.0 * (2.0 / params.eps_sec).log2()
}

// ---------------------------------------------------------------------------
// Distance sweep
// ---------------------------------------------------------------------------

/// One evaluated point of a dispersive-arm length sweep.
///
/// The headline `skr_*` fields are clamped at zero; the `*_raw` values keep
/// the sign for diagnostics. Both the compensated and the uncompensated
/// branch see identical loss — compensation changes interference quality
/// only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    /// Dispersive-arm length in km.
    pub length_km: f64,
    /// Clamped rate without chirp pre-compensation.
    pub skr_uncompensated: f64,
    /// Clamped rate with pre-compensation restoring the visibility ceiling.
    pub skr_compensated: f64,
    /// Unclamped counterpart of `skr_uncompensated`.
    pub skr_uncompensated_raw: f64,
    /// Unclamped counterpart of `skr_compensated`.
    pub skr_compensated_raw: f64,
    /// Interference visibility of the uncompensated branch.
    pub visibility_uncompensated: f64,
    /// Check-basis error rate of the uncompensated branch.
    pub e11x_uncompensated: f64,
}

/// Sweeps the dispersive-arm length and evaluates both branches per point.
///
/// For each length `L` from `min_km` to `max_km` in steps of `step_km`, the
/// swept arm accumulates dispersion `beta2_ps2_per_km · L` and loss
/// `loss_db_per_km · L`, while the reference arm keeps
/// `reference_length_km`. The uncompensated branch derives its visibility
/// from the accumulated dispersion; the compensated branch holds the
/// visibility ceiling. Loss is identical in both branches.
///
/// # Errors
///
/// [`Error::InvalidInput`] for invalid parameters, negative lengths, a
/// non-positive step, or `max_km < min_km`.
pub fn sweep(
    params: &SystemParams,
    reference_length_km: f64,
    min_km: f64,
    max_km: f64,
    step_km: f64,
    mode: RateMode,
) -> Result<Vec<RatePoint>> {
    params.validate()?;
    check_length("reference_length_km", reference_length_km)?;
    check_length("min_km", min_km)?;
    if !max_km.is_finite() || max_km < min_km {
        return Err(Error::InvalidInput(format!(
            "max_km must be at least min_km ({min_km}), got {max_km}"
        )));
    }
    if !step_km.is_finite() || step_km <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "step_km must be positive, got {step_km}"
        )));
    }

    // Taking the visibility as a ratio to the zero-dispersion shape keeps
    // the first sweep point exactly at the ceiling, so the two branches are
    // bit-identical when no net dispersion has accumulated.
    let baseline_shape = hom::analytic_visibility(params.t0_ps, 0.0)?;
    let count = ((max_km - min_km) / step_km + 1e-9).floor() as usize + 1;
    let mut points = Vec::with_capacity(count);
    for index in 0..count {
        let length_km = min_km + index as f64 * step_km;
        let net_dispersion = params.beta2_ps2_per_km * length_km;
        let shape = hom::analytic_visibility(params.t0_ps, net_dispersion)? / baseline_shape;
        let visibility = params.v_max * shape;

        let gains_uncompensated =
            channel_gains(params, reference_length_km, length_km, visibility)?;
        let gains_compensated =
            channel_gains(params, reference_length_km, length_km, params.v_max)?;
        let rate_uncompensated = secret_key_rate(&gains_uncompensated, params, mode)?;
        let rate_compensated = secret_key_rate(&gains_compensated, params, mode)?;

        points.push(RatePoint {
            length_km,
            skr_uncompensated: rate_uncompensated.clamped,
            skr_compensated: rate_compensated.clamped,
            skr_uncompensated_raw: rate_uncompensated.raw,
            skr_compensated_raw: rate_compensated.raw,
            visibility_uncompensated: visibility,
            e11x_uncompensated: gains_uncompensated.e11_x,
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// Shared range checks
// ---------------------------------------------------------------------------

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

fn check_alignment_error(value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..0.5).contains(&value) {
        return Err(Error::Domain(format!(
            "alignment error must lie in [0, 0.5), got {value}"
        )));
    }
    Ok(())
}

fn check_positive_finite(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn check_length(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be non-negative and finite, got {value}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
