//! Time grids, complex pulse envelopes, and chromatic-dispersion filters.
//!
//! Envelopes are slowly-varying complex amplitudes sampled on a uniform,
//! zero-centered [`TimeGrid`]. Under the spectral convention
//! `F(ω) = ∫ f(t)·exp(−i·ω·t) dt`, propagation through a span with
//! accumulated group-velocity dispersion `D` (ps²) is the pure phase filter
//! `exp(+i·D·ω²/2)`, and pre-compensation applies the exact inverse filter
//! `exp(−i·D·ω²/2)`. Launching a pre-compensated pulse into the same span
//! therefore restores the source envelope up to floating-point rounding,
//! independent of the sample count, because the two filters cancel exactly.
//!
//! For a Gaussian source the pre-compensated envelope is also available in
//! closed form ([`ComplexEnvelope::precompensated_gaussian`]): a wider
//! Gaussian magnitude carrying a quadratic phase chirp, which is what a pair
//! of intensity and phase modulators would be driven to synthesize
//! ([`ComplexEnvelope::modulator_drives`]).

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitude normalization constant for the Gaussian source pulse.
///
/// Chosen so that `(NORM/√T₀)·exp(−t²/(2T₀²))` carries unit energy to within
/// a few parts in 10⁵ (the exact unit-energy value would be π^(−1/4)).
pub const GAUSSIAN_NORM: f64 = 0.7511;

/// Largest tolerated envelope magnitude at the first/last grid sample,
/// relative to the peak. Grids that clip more than this are rejected so that
/// spectral operations never act on visibly truncated tails.
pub const EDGE_TRUNCATION_RATIO: f64 = 1e-8;

/// Magnitude floor, relative to the peak, below which the phase of an
/// envelope sample is treated as undefined by [`ComplexEnvelope::modulator_drives`].
pub const PHASE_BLANKING_RATIO: f64 = 1e-6;

/// Width parameter of a Gaussian pulse after accumulating dispersion.
///
/// A Gaussian amplitude of width `t0_ps` broadens to width
/// `√(T₀⁴ + D²)/T₀` after traversing accumulated dispersion `dispersion_ps2`.
/// The result is in ps and is independent of the sign of the dispersion.
pub fn broadened_width_ps(t0_ps: f64, dispersion_ps2: f64) -> f64 {
    (t0_ps.powi(4) + dispersion_ps2 * dispersion_ps2).sqrt() / t0_ps
}

/// Uniform, zero-centered sampling grid.
///
/// Sample `k` sits at `(k − n/2)·dt`, so an even-length grid always contains
/// `t = 0` exactly and spans `[−span/2, span/2 − dt]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n_samples: usize,
    dt_ps: f64,
}

impl TimeGrid {
    /// Builds a grid of `n_samples` points covering `span_ps` picoseconds.
    ///
    /// `n_samples` must be a power of two and at least 16 (the spectral
    /// filters run on radix-2 transforms); `span_ps` must be positive and
    /// finite. The sample spacing is `span_ps / n_samples`.
    pub fn new(n_samples: usize, span_ps: f64) -> Result<Self> {
        if n_samples < 16 || !n_samples.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid length must be a power of two >= 16, got {n_samples}"
            )));
        }
        if !(span_ps.is_finite() && span_ps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid span must be positive and finite, got {span_ps} ps"
            )));
        }
        Ok(Self {
            n_samples,
            dt_ps: span_ps / n_samples as f64,
        })
    }

    /// Builds a grid sized by the standard span policy for a pulse of width
    /// `t0_ps` that will accumulate up to `dispersion_ps2` of dispersion.
    ///
    /// The span is the larger of `32·T₀` and `16·√(T₀⁴ + D²)/T₀`, which keeps
    /// both the source pulse and its broadened counterpart above the
    /// [`EDGE_TRUNCATION_RATIO`] margin with room to spare.
    pub fn for_pulse(n_samples: usize, t0_ps: f64, dispersion_ps2: f64) -> Result<Self> {
        if !(t0_ps.is_finite() && t0_ps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pulse width must be positive and finite, got {t0_ps} ps"
            )));
        }
        if !dispersion_ps2.is_finite() {
            return Err(Error::InvalidInput("dispersion must be finite".to_string()));
        }
        let span = (32.0 * t0_ps).max(16.0 * broadened_width_ps(t0_ps, dispersion_ps2));
        Self::new(n_samples, span)
    }

    /// Number of samples.
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Sample spacing in ps.
    pub fn dt_ps(&self) -> f64 {
        self.dt_ps
    }

    /// Total span in ps (`n · dt`).
    pub fn span_ps(&self) -> f64 {
        self.n_samples as f64 * self.dt_ps
    }

    /// Time coordinate of sample `index`, in ps.
    pub fn time_at(&self, index: usize) -> f64 {
        (index as f64 - (self.n_samples / 2) as f64) * self.dt_ps
    }

    /// Iterator over all sample times, in ps.
    pub fn times(&self) -> impl Iterator<Item = f64> {
        let grid = *self;
        (0..grid.n_samples).map(move |i| grid.time_at(i))
    }

    /// Angular frequency (rad/ps) of FFT bin `bin`, in the standard
    /// wrap-around ordering: bins below `n/2` are non-negative frequencies,
    /// bins at and above `n/2` are negative.
    pub(crate) fn angular_frequency_at(&self, bin: usize) -> f64 {
        let n = self.n_samples;
        let signed = if bin < n / 2 {
            bin as f64
        } else {
            bin as f64 - n as f64
        };
        std::f64::consts::TAU * signed / (n as f64 * self.dt_ps)
    }
}

/// Parameters of a Gaussian source pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Width parameter T₀ of the amplitude envelope, in ps.
    pub t0_ps: f64,
    /// Center of the pulse on the time axis, in ps.
    pub center_ps: f64,
    /// Amplitude normalization constant (see [`GAUSSIAN_NORM`]).
    pub norm_const: f64,
}

impl PulseSpec {
    /// A centered pulse of width `t0_ps` with the standard normalization.
    pub fn new(t0_ps: f64) -> Self {
        Self {
            t0_ps,
            center_ps: 0.0,
            norm_const: GAUSSIAN_NORM,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0_ps.is_finite() && self.t0_ps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pulse width must be positive and finite, got {} ps",
                self.t0_ps
            )));
        }
        if !self.center_ps.is_finite() {
            return Err(Error::InvalidInput(
                "pulse center must be finite".to_string(),
            ));
        }
        if !(self.norm_const.is_finite() && self.norm_const > 0.0) {
            return Err(Error::InvalidInput(format!(
                "normalization constant must be positive, got {}",
                self.norm_const
            )));
        }
        Ok(())
    }
}

/// One fibre arm: dispersion coefficient, length, and attenuation.
///
/// The attenuation enters the photon-statistics layer only; normalized
/// coincidence curves are unaffected by a static loss common to all delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSpec {
    /// Group-velocity dispersion coefficient β⁽²⁾, in ps²/km.
    pub beta2_ps2_per_km: f64,
    /// Arm length, in km.
    pub length_km: f64,
    /// Attenuation, in dB/km.
    pub loss_db_per_km: f64,
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self {
            beta2_ps2_per_km: 20.0,
            length_km: 0.0,
            loss_db_per_km: 0.2,
        }
    }
}

impl FiberSpec {
    /// Accumulated dispersion `β⁽²⁾·L` of the arm, in ps².
    pub fn dispersion_ps2(&self) -> f64 {
        self.beta2_ps2_per_km * self.length_km
    }

    /// Total attenuation `loss·L` of the arm, in dB.
    pub fn attenuation_db(&self) -> f64 {
        self.loss_db_per_km * self.length_km
    }

    /// Checks that the arm parameters are physically meaningful.
    pub fn validate(&self) -> Result<()> {
        if !self.beta2_ps2_per_km.is_finite() {
            return Err(Error::InvalidInput(
                "beta2_ps2_per_km must be finite".to_string(),
            ));
        }
        if !(self.length_km.is_finite() && self.length_km >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "length_km must be non-negative, got {} km",
                self.length_km
            )));
        }
        if !(self.loss_db_per_km.is_finite() && self.loss_db_per_km >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "loss_db_per_km must be non-negative, got {} dB/km",
                self.loss_db_per_km
            )));
        }
        Ok(())
    }
}

/// Intensity and phase drive waveforms for an electro-optic modulator pair.
///
/// Together with `peak_magnitude` these reconstruct the envelope wherever the
/// magnitude is above the blanking floor:
/// `env(t) = peak_magnitude·√intensity_norm(t)·exp(i·phase_rad(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatorDrives {
    /// Envelope intensity normalized to a unit peak, one value per sample.
    pub intensity_norm: Vec<f64>,
    /// Unwrapped envelope phase in radians, zeroed where the magnitude is
    /// below [`PHASE_BLANKING_RATIO`] of the peak.
    pub phase_rad: Vec<f64>,
    /// Peak envelope magnitude the intensity column is normalized to.
    pub peak_magnitude: f64,
}

/// A complex envelope sampled on a [`TimeGrid`].
#[derive(Debug, Clone)]
pub struct ComplexEnvelope {
    grid: TimeGrid,
    amplitude: Vec<Complex64>,
}

impl ComplexEnvelope {
    /// Wraps raw samples, checking length and finiteness.
    pub fn new(grid: TimeGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.n_samples() {
            return Err(Error::InvalidInput(format!(
                "envelope has {} samples but the grid has {}",
                amplitude.len(),
                grid.n_samples()
            )));
        }
        if amplitude
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::InvalidInput(
                "envelope samples must be finite".to_string(),
            ));
        }
        Ok(Self { grid, amplitude })
    }

    /// Synthesizes the Gaussian source pulse
    /// `(norm/√T₀)·exp(−(t−c)²/(2T₀²))` on `grid`.
    ///
    /// Fails with [`Error::Truncation`] when the grid spans less than `16·T₀`
    /// or the pulse tails at the grid edges exceed [`EDGE_TRUNCATION_RATIO`]
    /// of the peak (e.g. for a far off-center pulse).
    pub fn gaussian(grid: TimeGrid, spec: &PulseSpec) -> Result<Self> {
        spec.validate()?;
        if grid.span_ps() < 16.0 * spec.t0_ps {
            return Err(Error::Truncation(format!(
                "grid span {:.3} ps is below the required 16·T0 = {:.3} ps",
                grid.span_ps(),
                16.0 * spec.t0_ps
            )));
        }
        let scale = spec.norm_const / spec.t0_ps.sqrt();
        let amplitude = grid
            .times()
            .map(|t| {
                let u = (t - spec.center_ps) / spec.t0_ps;
                Complex64::new(scale * (-0.5 * u * u).exp(), 0.0)
            })
            .collect();
        let env = Self { grid, amplitude };
        env.check_edge_truncation()?;
        Ok(env)
    }

    /// Synthesizes the pre-compensated Gaussian in closed form.
    ///
    /// For a Gaussian source of width `T₀` and a target span with accumulated
    /// dispersion `D`, the exact inverse-filtered envelope is again Gaussian:
    ///
    /// ```text
    /// f(t) = norm·√T₀·(T₀⁴ + D²)^(−1/4)
    ///        · exp(−t²·T₀²/(2(T₀⁴ + D²)))                 (magnitude)
    ///        · exp(+i·D·t²/(2(T₀⁴ + D²)) − (i/2)·atan(D/T₀²)) (phase)
    /// ```
    ///
    /// a wider pulse of width `√(T₀⁴ + D²)/T₀` carrying a quadratic chirp of
    /// curvature `D/(T₀⁴ + D²)` rad/ps². At `D = 0` it reduces to the plain
    /// Gaussian. Propagating the result through dispersion `D` restores the
    /// source pulse.
    ///
    /// Fails with [`Error::Truncation`] when the grid cannot hold the
    /// broadened envelope within [`EDGE_TRUNCATION_RATIO`].
    pub fn precompensated_gaussian(
        grid: TimeGrid,
        spec: &PulseSpec,
        dispersion_ps2: f64,
    ) -> Result<Self> {
        spec.validate()?;
        if !dispersion_ps2.is_finite() {
            return Err(Error::InvalidInput("dispersion must be finite".to_string()));
        }
        let t0 = spec.t0_ps;
        let denom = t0.powi(4) + dispersion_ps2 * dispersion_ps2;
        let width = broadened_width_ps(t0, dispersion_ps2);
        if grid.span_ps() < 16.0 * width {
            return Err(Error::Truncation(format!(
                "grid span {:.3} ps is below 16x the pre-compensated width {:.3} ps",
                grid.span_ps(),
                width
            )));
        }
        let scale = spec.norm_const * t0.sqrt() / denom.powf(0.25);
        let curvature = dispersion_ps2 / denom;
        let constant_phase = -0.5 * (dispersion_ps2 / (t0 * t0)).atan();
        let amplitude = grid
            .times()
            .map(|t| {
                let tc = t - spec.center_ps;
                let mag = scale * (-0.5 * tc * tc * t0 * t0 / denom).exp();
                let phase = 0.5 * curvature * tc * tc + constant_phase;
                Complex64::from_polar(mag, phase)
            })
            .collect();
        let env = Self { grid, amplitude };
        env.check_edge_truncation()?;
        Ok(env)
    }

    /// The sampling grid.
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// The complex samples, in grid order.
    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    /// Pulse energy `∫|f|² dt`, by Riemann sum.
    pub fn energy(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt_ps()
    }

    /// Largest sample magnitude.
    pub fn peak_magnitude(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Root-mean-square duration of the intensity profile `|f|²`, in ps.
    ///
    /// For a Gaussian amplitude of width `T` this is `T/√2`.
    pub fn rms_width_ps(&self) -> f64 {
        let mut weight = 0.0;
        let mut first = 0.0;
        let mut second = 0.0;
        for (t, a) in self.grid.times().zip(&self.amplitude) {
            let w = a.norm_sqr();
            weight += w;
            first += w * t;
            second += w * t * t;
        }
        if weight == 0.0 {
            return 0.0;
        }
        let mean = first / weight;
        (second / weight - mean * mean).max(0.0).sqrt()
    }

    /// Applies the dispersive-propagation filter `exp(+i·D·ω²/2)`.
    pub fn propagate(&self, dispersion_ps2: f64) -> Self {
        self.spectral_quadratic_phase(0.5 * dispersion_ps2)
    }

    /// Applies the pre-compensation filter `exp(−i·D·ω²/2)`, the exact
    /// inverse of [`ComplexEnvelope::propagate`] for the same dispersion.
    pub fn precompensate(&self, dispersion_ps2: f64) -> Self {
        self.spectral_quadratic_phase(-0.5 * dispersion_ps2)
    }

    /// Multiplies the spectrum by `exp(i·coeff·ω²)` and transforms back.
    ///
    /// Pure phase filters preserve energy and magnitude spectra exactly, so
    /// no renormalization beyond the FFT scaling is applied.
    fn spectral_quadratic_phase(&self, coeff: f64) -> Self {
        let n = self.grid.n_samples();
        let mut buffer = self.amplitude.clone();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buffer);
        for (bin, value) in buffer.iter_mut().enumerate() {
            let omega = self.grid.angular_frequency_at(bin);
            *value *= Complex64::from_polar(1.0, coeff * omega * omega);
        }
        planner.plan_fft_inverse(n).process(&mut buffer);
        let scale = 1.0 / n as f64;
        for value in buffer.iter_mut() {
            *value *= scale;
        }
        Self {
            grid: self.grid,
            amplitude: buffer,
        }
    }

    /// Extracts the intensity and unwrapped-phase drive waveforms that a
    /// modulator pair needs to synthesize this envelope.
    ///
    /// The phase is unwrapped outward from the envelope peak within each
    /// contiguous run of samples whose magnitude is at least
    /// [`PHASE_BLANKING_RATIO`] of the peak; below that floor the phase is
    /// reported as zero. Fails for an all-zero envelope.
    pub fn modulator_drives(&self) -> Result<ModulatorDrives> {
        let peak = self.peak_magnitude();
        if peak <= 0.0 {
            return Err(Error::InvalidInput(
                "modulator drives are undefined for an all-zero envelope".to_string(),
            ));
        }
        let n = self.amplitude.len();
        let threshold = PHASE_BLANKING_RATIO * peak;
        let magnitudes: Vec<f64> = self.amplitude.iter().map(|a| a.norm()).collect();
        let peak_index = magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty envelope");

        let intensity_norm = magnitudes.iter().map(|m| (m / peak) * (m / peak)).collect();

        let mut phase_rad = vec![0.0; n];
        let active: Vec<bool> = magnitudes.iter().map(|m| *m >= threshold).collect();
        let mut start = 0;
        while start < n {
            if !active[start] {
                start += 1;
                continue;
            }
            let mut end = start;
            while end + 1 < n && active[end + 1] {
                end += 1;
            }
            // Anchor the unwrap at the global peak when this run contains it,
            // otherwise at the run's first sample.
            let anchor = if (start..=end).contains(&peak_index) {
                peak_index
            } else {
                start
            };
            phase_rad[anchor] = self.amplitude[anchor].arg();
            for k in (anchor + 1)..=end {
                let step = wrap_phase(self.amplitude[k].arg() - self.amplitude[k - 1].arg());
                phase_rad[k] = phase_rad[k - 1] + step;
            }
            for k in (start..anchor).rev() {
                let step = wrap_phase(self.amplitude[k].arg() - self.amplitude[k + 1].arg());
                phase_rad[k] = phase_rad[k + 1] + step;
            }
            start = end + 1;
        }

        Ok(ModulatorDrives {
            intensity_norm,
            phase_rad,
            peak_magnitude: peak,
        })
    }

    fn check_edge_truncation(&self) -> Result<()> {
        let peak = self.peak_magnitude();
        if peak <= 0.0 {
            return Err(Error::InvalidInput(
                "envelope is identically zero on the grid".to_string(),
            ));
        }
        let first = self.amplitude.first().map_or(0.0, |a| a.norm());
        let last = self.amplitude.last().map_or(0.0, |a| a.norm());
        let limit = EDGE_TRUNCATION_RATIO * peak;
        if first > limit || last > limit {
            return Err(Error::Truncation(format!(
                "envelope tails are clipped at the grid edges \
                 (edge/peak ratio {:.3e}, limit {:.1e})",
                first.max(last) / peak,
                EDGE_TRUNCATION_RATIO
            )));
        }
        Ok(())
    }
}

/// Relative L2 distance `‖a − b‖ / ‖b‖` between two envelopes on one grid.
///
/// The second argument is the reference that normalizes the distance.
pub fn relative_l2_distance(
    candidate: &ComplexEnvelope,
    reference: &ComplexEnvelope,
) -> Result<f64> {
    if candidate.grid() != reference.grid() {
        return Err(Error::InvalidInput(
            "envelopes are sampled on different grids".to_string(),
        ));
    }
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (a, b) in candidate.amplitude.iter().zip(&reference.amplitude) {
        diff += (a - b).norm_sqr();
        norm += b.norm_sqr();
    }
    if norm == 0.0 {
        return Err(Error::InvalidInput(
            "reference envelope is identically zero".to_string(),
        ));
    }
    Ok((diff / norm).sqrt())
}

/// Wraps a phase difference into `(−π, π]`.
fn wrap_phase(delta: f64) -> f64 {
    let mut wrapped = delta % std::f64::consts::TAU;
    if wrapped > std::f64::consts::PI {
        wrapped -= std::f64::consts::TAU;
    } else if wrapped <= -std::f64::consts::PI {
        wrapped += std::f64::consts::TAU;
    }
    wrapped
}
