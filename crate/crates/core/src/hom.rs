//! Two-pulse interference: overlap integrals, coincidence-dip curves, dip
//! summaries, closed-form Gaussian references, and counting noise.
//!
//! When two independent weak pulses meet on a balanced beam splitter, the
//! coincidence rate between its output detectors dips as the pulses are made
//! indistinguishable. For phase-averaged coherent states the dip reaches at
//! most half of the baseline, so the normalized curve is modeled as
//! `c(τ) = 1 − v_max·|γ(τ)|²`, where `γ(τ)` is the normalized envelope
//! overlap at relative delay `τ` and `v_max` is the source-statistics
//! ceiling ([`COHERENT_VISIBILITY_CEILING`] for coherent pulses).
//!
//! Dispersion asymmetry between the two arrival paths reduces the overlap and
//! thus the dip visibility while widening the dip. For Gaussian pulses both
//! effects follow closed forms ([`analytic_visibility`], [`analytic_fwhm`])
//! against which simulated curves can be checked to high accuracy.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{broadened_width_ps, ComplexEnvelope, TimeGrid};

/// Largest dip visibility reachable with phase-averaged coherent pulses.
pub const COHERENT_VISIBILITY_CEILING: f64 = 0.5;

/// Minimum number of delay samples a curve must have before a dip summary is
/// attempted.
pub const MIN_SUMMARY_SAMPLES: usize = 64;

const LN_2: f64 = std::f64::consts::LN_2;

/// Normalized mutual overlap `γ(τ) = ∫a*(t−τ)·b(t) dt / √(E_a·E_b)` of two
/// envelopes sampled on the same grid.
///
/// Evaluated spectrally, so the delay `τ` is not restricted to multiples of
/// the sample spacing; it must stay within half the grid span. By the
/// Cauchy–Schwarz inequality `|γ| ≤ 1` up to rounding.
pub fn mutual_overlap(
    reference: &ComplexEnvelope,
    delayed: &ComplexEnvelope,
    delay_ps: f64,
) -> Result<Complex64> {
    let kernel = OverlapKernel::new(reference, delayed)?;
    kernel.check_delay(delay_ps)?;
    Ok(kernel.evaluate(delay_ps))
}

/// Precomputed spectral kernel for evaluating `γ(τ)` at many delays.
///
/// Building the kernel performs the two Fourier transforms once; every
/// evaluation afterwards is a single weighted phase sum, and evaluating a
/// list of delays one by one is bit-identical to any other evaluation order.
pub struct OverlapKernel {
    coefficients: Vec<Complex64>,
    angular_frequencies: Vec<f64>,
    max_delay_ps: f64,
}

impl OverlapKernel {
    /// Prepares the kernel for `γ(τ) = ∫reference*(t−τ)·delayed(t) dt`
    /// normalized by the two pulse energies.
    pub fn new(reference: &ComplexEnvelope, delayed: &ComplexEnvelope) -> Result<Self> {
        let grid = reference.grid();
        if grid != delayed.grid() {
            return Err(Error::InvalidInput(
                "overlap requires both envelopes on the same grid".to_string(),
            ));
        }
        let energy = reference.energy() * delayed.energy();
        if energy <= 0.0 {
            return Err(Error::InvalidInput(
                "overlap is undefined for a zero-energy envelope".to_string(),
            ));
        }
        let n = grid.n_samples();
        let mut spectrum_a: Vec<Complex64> = reference.amplitude().to_vec();
        let mut spectrum_b: Vec<Complex64> = delayed.amplitude().to_vec();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        fft.process(&mut spectrum_a);
        fft.process(&mut spectrum_b);

        // Parseval with a band-limited shift of the reference envelope:
        //   ∫a*(t−τ)·b(t) dt = (dt/n)·Σ_m conj(A_m)·B_m·exp(+i·ω_m·τ)
        let scale = grid.dt_ps() / (n as f64 * energy.sqrt());
        let coefficients = spectrum_a
            .iter()
            .zip(&spectrum_b)
            .map(|(a, b)| a.conj() * b * scale)
            .collect();
        let angular_frequencies = (0..n).map(|m| grid.angular_frequency_at(m)).collect();
        Ok(Self {
            coefficients,
            angular_frequencies,
            max_delay_ps: grid.span_ps() / 2.0,
        })
    }

    /// Largest delay magnitude the underlying grid supports.
    pub fn max_delay_ps(&self) -> f64 {
        self.max_delay_ps
    }

    /// Evaluates `γ(τ)` at one delay.
    pub fn evaluate(&self, delay_ps: f64) -> Complex64 {
        self.coefficients
            .iter()
            .zip(&self.angular_frequencies)
            .map(|(c, omega)| c * Complex64::from_polar(1.0, omega * delay_ps))
            .sum()
    }

    fn check_delay(&self, delay_ps: f64) -> Result<()> {
        if !delay_ps.is_finite() || delay_ps.abs() > self.max_delay_ps {
            return Err(Error::InvalidInput(format!(
                "delay {delay_ps} ps exceeds the grid's +/-{} ps window",
                self.max_delay_ps
            )));
        }
        Ok(())
    }

    /// Positive delay at which `|γ(τ)|²` falls to half its `τ = 0` value,
    /// found by bisection. Fails when the half point lies outside the grid's
    /// delay window or the overlap does not decay.
    pub fn half_overlap_delay_ps(&self) -> Result<f64> {
        let at_zero = self.evaluate(0.0).norm_sqr();
        if at_zero <= 0.0 {
            return Err(Error::Estimation(
                "overlap vanishes at zero delay; no dip to calibrate".to_string(),
            ));
        }
        let target = 0.5 * at_zero;
        let mut lo = 0.0_f64;
        let mut hi = self.max_delay_ps;
        if self.evaluate(hi).norm_sqr() > target {
            return Err(Error::Estimation(
                "overlap has not decayed to half within the grid's delay window".to_string(),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.evaluate(mid).norm_sqr() > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * self.max_delay_ps {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Grid sized for interfering a pulse pair with accumulated dispersions
/// `dispersion_a_ps2` and `dispersion_b_ps2`.
///
/// The span simultaneously holds both broadened envelopes within the edge
/// margin and leaves room for the widest half-depth-derived delay window the
/// pair can need, so curves sampled on [`auto_delays`] never run off the
/// grid.
pub fn interference_grid(
    n_samples: usize,
    t0_ps: f64,
    dispersion_a_ps2: f64,
    dispersion_b_ps2: f64,
) -> Result<TimeGrid> {
    if !(t0_ps.is_finite() && t0_ps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pulse width must be positive and finite, got {t0_ps} ps"
        )));
    }
    if !dispersion_a_ps2.is_finite() || !dispersion_b_ps2.is_finite() {
        return Err(Error::InvalidInput("dispersion must be finite".to_string()));
    }
    let width_a = broadened_width_ps(t0_ps, dispersion_a_ps2);
    let width_b = broadened_width_ps(t0_ps, dispersion_b_ps2);
    let pair_width = (width_a * width_a + width_b * width_b).sqrt();
    // |γ(τ)|² decays no slower than a Gaussian of variance w_a² + w_b², so
    // the rescaled dip width is at most 2·pair_width/√ln2 and the ±4-width
    // summary window reaches 8·pair_width/√ln2; a further 8·pair_width
    // keeps the spectrally shifted envelope clear of the wrap-around edge
    // at the largest delay.
    let half_span = 8.0 * pair_width / LN_2.sqrt() + 8.0 * pair_width;
    let span = (32.0 * t0_ps)
        .max(16.0 * width_a)
        .max(16.0 * width_b)
        .max(2.0 * half_span);
    TimeGrid::new(n_samples, span)
}

/// Symmetric delay grid calibrated to the pair's actual dip width.
///
/// The half-depth delay of `|γ|²` is located by bisection, converted to the
/// rescaled width (half-depth width divided by ln 2), and the grid spans ±4
/// of those widths in `steps` uniform samples. With an odd number of steps
/// the center sample is exactly zero delay.
pub fn auto_delays(
    reference: &ComplexEnvelope,
    delayed: &ComplexEnvelope,
    steps: usize,
) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidInput(format!(
            "a delay grid needs at least 2 steps, got {steps}"
        )));
    }
    let kernel = OverlapKernel::new(reference, delayed)?;
    let half_delay = kernel.half_overlap_delay_ps()?;
    let rescaled_width = 2.0 * half_delay / LN_2;
    let reach = (4.0 * rescaled_width).min(kernel.max_delay_ps());
    let spacing = 2.0 * reach / (steps - 1) as f64;
    let mid = (steps - 1) as f64 / 2.0;
    Ok((0..steps).map(|i| (i as f64 - mid) * spacing).collect())
}

/// A normalized coincidence curve sampled on a strictly increasing delay
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceCurve {
    delays_ps: Vec<f64>,
    coincidence: Vec<f64>,
    baseline: f64,
}

impl CoincidenceCurve {
    /// Wraps raw curve data, checking ordering, finiteness, and sign.
    ///
    /// `baseline` records the normalization constant the values were divided
    /// by: 1 for analytic curves, the mean count per bin for counted data.
    pub fn new(delays_ps: Vec<f64>, coincidence: Vec<f64>, baseline: f64) -> Result<Self> {
        if delays_ps.len() != coincidence.len() {
            return Err(Error::InvalidInput(format!(
                "curve has {} delays but {} coincidence values",
                delays_ps.len(),
                coincidence.len()
            )));
        }
        if delays_ps.len() < 2 {
            return Err(Error::InvalidInput(
                "a coincidence curve needs at least 2 samples".to_string(),
            ));
        }
        if delays_ps.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidInput("delays must be finite".to_string()));
        }
        if delays_ps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "delays must be strictly increasing".to_string(),
            ));
        }
        if coincidence.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidInput(
                "coincidence values must be finite and non-negative".to_string(),
            ));
        }
        if !(baseline.is_finite() && baseline > 0.0) {
            return Err(Error::InvalidInput(format!(
                "baseline must be positive and finite, got {baseline}"
            )));
        }
        Ok(Self {
            delays_ps,
            coincidence,
            baseline,
        })
    }

    /// Delay coordinates, in ps.
    pub fn delays_ps(&self) -> &[f64] {
        &self.delays_ps
    }

    /// Normalized coincidence values, one per delay.
    pub fn coincidence(&self) -> &[f64] {
        &self.coincidence
    }

    /// Normalization constant the values were divided by.
    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    /// Number of delay samples.
    pub fn len(&self) -> usize {
        self.delays_ps.len()
    }

    /// True when the curve holds no samples (never, for validated curves).
    pub fn is_empty(&self) -> bool {
        self.delays_ps.is_empty()
    }

    /// Replaces each value with a Poisson draw of mean
    /// `mean_counts_per_bin · value`, renormalized by the same mean.
    ///
    /// The generator is a counter-seeded ChaCha stream, so equal seeds
    /// reproduce the curve bit for bit and nearby seeds are uncorrelated.
    pub fn with_poisson_noise(&self, mean_counts_per_bin: f64, seed: u64) -> Result<Self> {
        if !(mean_counts_per_bin.is_finite() && mean_counts_per_bin > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mean counts per bin must be positive, got {mean_counts_per_bin}"
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut noisy = Vec::with_capacity(self.coincidence.len());
        for value in &self.coincidence {
            let lambda = mean_counts_per_bin * value;
            let counts = if lambda > 0.0 {
                Poisson::new(lambda)
                    .map_err(|e| Error::InvalidInput(format!("invalid Poisson mean: {e}")))?
                    .sample(&mut rng)
            } else {
                0.0
            };
            noisy.push(counts / mean_counts_per_bin);
        }
        Ok(Self {
            delays_ps: self.delays_ps.clone(),
            coincidence: noisy,
            baseline: mean_counts_per_bin,
        })
    }

    /// Measures the dip: baseline from the outer 10% of samples, visibility
    /// from the interior minimum, and the full width at half depth from
    /// linearly interpolated crossings.
    ///
    /// Fails when the curve has fewer than [`MIN_SUMMARY_SAMPLES`] samples,
    /// shows no dip, has its minimum at the window edge, or never recovers to
    /// half depth inside the window.
    pub fn summarize(&self) -> Result<HomSummary> {
        let n = self.coincidence.len();
        if n < MIN_SUMMARY_SAMPLES {
            return Err(Error::Estimation(format!(
                "dip summary needs at least {MIN_SUMMARY_SAMPLES} samples, got {n}"
            )));
        }
        let band = (n / 20).max(1);
        let outer_sum: f64 = self.coincidence[..band]
            .iter()
            .chain(&self.coincidence[n - band..])
            .sum();
        let baseline = outer_sum / (2 * band) as f64;
        if baseline <= 0.0 || baseline.is_nan() {
            return Err(Error::Estimation(
                "curve baseline is not positive".to_string(),
            ));
        }

        let (min_index, &min_value) = self
            .coincidence
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty curve");
        if min_index == 0 || min_index == n - 1 {
            return Err(Error::Estimation(
                "dip minimum sits at the edge of the delay window".to_string(),
            ));
        }
        let depth = baseline - min_value;
        if depth <= 1e-9 * baseline {
            return Err(Error::Estimation(
                "curve shows no dip above the baseline noise floor".to_string(),
            ));
        }

        let level = baseline - 0.5 * depth;
        let left = self.crossing(min_index, level, Direction::Left)?;
        let right = self.crossing(min_index, level, Direction::Right)?;
        let fwhm_half = right - left;
        Ok(HomSummary {
            visibility: depth / baseline,
            fwhm_half_ps: fwhm_half,
            fwhm_paper_ps: fwhm_half / LN_2,
            baseline,
        })
    }

    /// Walks outward from the minimum until the curve recovers to `level`,
    /// then interpolates the crossing delay linearly.
    fn crossing(&self, min_index: usize, level: f64, direction: Direction) -> Result<f64> {
        let mut k = min_index;
        loop {
            let next = match direction {
                Direction::Left if k > 0 => k - 1,
                Direction::Right if k < self.coincidence.len() - 1 => k + 1,
                _ => {
                    return Err(Error::Estimation(
                        "dip does not recover to half depth inside the delay window".to_string(),
                    ))
                }
            };
            if self.coincidence[next] >= level {
                let inner = self.coincidence[k];
                let outer = self.coincidence[next];
                let t_inner = self.delays_ps[k];
                let t_outer = self.delays_ps[next];
                return Ok(t_inner + (level - inner) * (t_outer - t_inner) / (outer - inner));
            }
            k = next;
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Left,
    Right,
}

/// Measured dip parameters of a coincidence curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomSummary {
    /// Dip depth relative to the baseline.
    pub visibility: f64,
    /// Full width of the dip at half depth, in ps.
    pub fwhm_half_ps: f64,
    /// Half-depth width divided by ln 2, in ps — the width convention used
    /// by the closed-form references.
    pub fwhm_paper_ps: f64,
    /// Baseline level estimated from the outer 10% of samples.
    pub baseline: f64,
}

/// Simulates the normalized coincidence curve `1 − v_max·|γ(τ)|²` for two
/// envelopes over a strictly increasing list of delays.
///
/// `visibility_ceiling` is the source-statistics cap `v_max` in `(0, 1]`.
/// Every delay must lie within half the grid span. The per-delay overlap
/// evaluations reuse one precomputed kernel and run in delay order, so the
/// result is bit-identical to evaluating [`mutual_overlap`] delay by delay.
pub fn coincidence_curve(
    reference: &ComplexEnvelope,
    delayed: &ComplexEnvelope,
    delays_ps: &[f64],
    visibility_ceiling: f64,
) -> Result<CoincidenceCurve> {
    if !(visibility_ceiling > 0.0 && visibility_ceiling <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "visibility ceiling must lie in (0, 1], got {visibility_ceiling}"
        )));
    }
    if delays_ps.is_empty() {
        return Err(Error::InvalidInput("delay list is empty".to_string()));
    }
    let kernel = OverlapKernel::new(reference, delayed)?;
    for delay in delays_ps {
        kernel.check_delay(*delay)?;
    }
    let coincidence: Vec<f64> = delays_ps
        .iter()
        .map(|delay| {
            let overlap = kernel.evaluate(*delay).norm_sqr();
            (1.0 - visibility_ceiling * overlap).max(0.0)
        })
        .collect();
    CoincidenceCurve::new(delays_ps.to_vec(), coincidence, 1.0)
}

/// Closed-form dip visibility for phase-averaged coherent Gaussian pulses of
/// width `t0_ps` whose paths differ by `asymmetry_ps2` of accumulated
/// dispersion: `V = T₀²/√(4T₀⁴ + α²)`.
///
/// The coherent ceiling is built in: the value is
/// [`COHERENT_VISIBILITY_CEILING`] at zero asymmetry and falls from there.
pub fn analytic_visibility(t0_ps: f64, asymmetry_ps2: f64) -> Result<f64> {
    check_width_and_asymmetry(t0_ps, asymmetry_ps2)?;
    let t0_sq = t0_ps * t0_ps;
    Ok(t0_sq / (4.0 * t0_sq * t0_sq + asymmetry_ps2 * asymmetry_ps2).sqrt())
}

/// Closed-form dip width (the `fwhm_paper_ps` convention: half-depth width
/// divided by ln 2) for the same Gaussian pair:
/// `d = √((2α²/T₀² + 8T₀²)/ln 2)`, in ps.
pub fn analytic_fwhm(t0_ps: f64, asymmetry_ps2: f64) -> Result<f64> {
    check_width_and_asymmetry(t0_ps, asymmetry_ps2)?;
    let t0_sq = t0_ps * t0_ps;
    Ok(((2.0 * asymmetry_ps2 * asymmetry_ps2 / t0_sq + 8.0 * t0_sq) / LN_2).sqrt())
}

fn check_width_and_asymmetry(t0_ps: f64, asymmetry_ps2: f64) -> Result<()> {
    if !(t0_ps.is_finite() && t0_ps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pulse width must be positive and finite, got {t0_ps} ps"
        )));
    }
    if !asymmetry_ps2.is_finite() {
        return Err(Error::InvalidInput(
            "dispersion asymmetry must be finite".to_string(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::PulseSpec;

    fn gaussian_pair(
        t0: f64,
        dispersion_a: f64,
        dispersion_b: f64,
    ) -> (ComplexEnvelope, ComplexEnvelope) {
        let grid = interference_grid(4096, t0, dispersion_a, dispersion_b).unwrap();
        let spec = PulseSpec::new(t0);
        let source = ComplexEnvelope::gaussian(grid, &spec).unwrap();
        (
            source.propagate(dispersion_a),
            source.propagate(dispersion_b),
        )
    }

    /// Direct Riemann-sum overlap used as an independent check on the
    /// spectral kernel. Only integer-sample delays are supported.
    fn time_domain_overlap(
        reference: &ComplexEnvelope,
        delayed: &ComplexEnvelope,
        shift_samples: usize,
    ) -> Complex64 {
        let a = reference.amplitude();
        let b = delayed.amplitude();
        let dt = reference.grid().dt_ps();
        let mut sum = Complex64::new(0.0, 0.0);
        for k in shift_samples..a.len() {
            sum += a[k - shift_samples].conj() * b[k];
        }
        sum * dt / (reference.energy() * delayed.energy()).sqrt()
    }

    #[test]
    fn overlap_of_identical_pulses_is_unity() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let overlap = mutual_overlap(&a, &b, 0.0).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        assert!(overlap.im.abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_time_domain_sum_at_integer_shift() {
        // dt = 640/4096 ps makes τ = 20 ps an exact 128-sample shift.
        let grid = TimeGrid::new(4096, 640.0).unwrap();
        let spec = PulseSpec::new(20.0);
        let a = ComplexEnvelope::gaussian(grid, &spec).unwrap();
        let b = a.clone();
        let spectral = mutual_overlap(&a, &b, 20.0).unwrap();
        let direct = time_domain_overlap(&a, &b, 128);
        assert!((spectral - direct).norm() < 1e-10);
        // Identical Gaussians delayed by τ overlap as exp(−τ²/(4T₀²)).
        assert!((spectral.norm_sqr() - (-0.5_f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn overlap_of_dispersed_pair_matches_closed_form() {
        let (a, b) = gaussian_pair(20.0, 1200.0, 0.0);
        let spectral = mutual_overlap(&a, &b, 0.0).unwrap();
        let direct = time_domain_overlap(&a, &b, 0);
        assert!((spectral - direct).norm() < 1e-10);
        // |γ(0)|² = 2T₀²/√(4T₀⁴ + α²)
        let expected = 2.0 * 400.0 / (4.0 * 160_000.0_f64 + 1_440_000.0).sqrt();
        assert!((spectral.norm_sqr() - expected).abs() < 1e-6);
        assert!((spectral.norm_sqr() - 0.55470).abs() < 1e-4);
    }

    #[test]
    fn overlap_rejects_mismatched_grids_and_out_of_range_delays() {
        let grid_a = TimeGrid::new(4096, 640.0).unwrap();
        let grid_b = TimeGrid::new(2048, 640.0).unwrap();
        let spec = PulseSpec::new(20.0);
        let a = ComplexEnvelope::gaussian(grid_a, &spec).unwrap();
        let b = ComplexEnvelope::gaussian(grid_b, &spec).unwrap();
        assert!(matches!(
            mutual_overlap(&a, &b, 0.0),
            Err(Error::InvalidInput(_))
        ));
        let c = ComplexEnvelope::gaussian(grid_a, &spec).unwrap();
        assert!(matches!(
            mutual_overlap(&a, &c, 321.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn curve_touches_half_at_zero_delay_and_one_in_the_tails() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let center = curve.coincidence()[100];
        assert_eq!(curve.delays_ps()[100], 0.0);
        assert!((center - 0.5).abs() < 1e-9);
        assert!((curve.coincidence()[0] - 1.0).abs() < 1e-9);
        assert!((curve.coincidence()[200] - 1.0).abs() < 1e-9);
        assert!(curve
            .coincidence()
            .iter()
            .all(|c| (0.5 - 1e-9..=1.0 + 1e-9).contains(c)));
    }

    #[test]
    fn curve_is_symmetric_in_delay() {
        let (a, b) = gaussian_pair(20.0, 1200.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let values = curve.coincidence();
        for i in 0..values.len() / 2 {
            assert!(
                (values[i] - values[values.len() - 1 - i]).abs() < 1e-9,
                "asymmetry at sample {i}"
            );
        }
    }

    #[test]
    fn summary_of_matched_pair_hits_the_coherent_ceiling() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let summary = curve.summarize().unwrap();
        assert!((summary.visibility - 0.5).abs() < 1e-3);
        assert!((summary.baseline - 1.0).abs() < 1e-6);
        let expected_width = analytic_fwhm(20.0, 0.0).unwrap();
        assert!((expected_width - 67.9457).abs() < 1e-3);
        assert!((summary.fwhm_paper_ps - expected_width).abs() < 5e-3 * expected_width);
        assert!((summary.fwhm_half_ps - expected_width * LN_2).abs() < 5e-3 * expected_width);
        assert_eq!(summary.fwhm_paper_ps, summary.fwhm_half_ps / LN_2);
    }

    #[test]
    fn summary_of_dispersed_pair_matches_closed_forms() {
        let (a, b) = gaussian_pair(20.0, 1200.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let summary = curve.summarize().unwrap();
        assert!((summary.visibility - 0.27735).abs() < 1e-3);
        let expected_width = analytic_fwhm(20.0, 1200.0).unwrap();
        assert!((expected_width - 122.4904).abs() < 1e-3);
        assert!((summary.fwhm_paper_ps - expected_width).abs() < 5e-3 * expected_width);
    }

    #[test]
    fn summaries_track_closed_forms_across_widths_and_asymmetries() {
        for t0 in [10.0, 20.0, 40.0] {
            let mut previous: Option<(f64, f64)> = None;
            for asymmetry in [0.0, 300.0, 600.0, 1200.0, 2400.0] {
                let (a, b) = gaussian_pair(t0, asymmetry, 0.0);
                let delays = auto_delays(&a, &b, 201).unwrap();
                let curve =
                    coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
                let summary = curve.summarize().unwrap();
                let expected_vis = analytic_visibility(t0, asymmetry).unwrap();
                let expected_width = analytic_fwhm(t0, asymmetry).unwrap();
                assert!(
                    (summary.visibility - expected_vis).abs() < 1e-3,
                    "T0 = {t0}, asymmetry = {asymmetry}: visibility {} vs {}",
                    summary.visibility,
                    expected_vis
                );
                assert!(
                    (summary.fwhm_paper_ps - expected_width).abs() < 5e-3 * expected_width,
                    "T0 = {t0}, asymmetry = {asymmetry}: width {} vs {}",
                    summary.fwhm_paper_ps,
                    expected_width
                );
                if let Some((prev_vis, prev_width)) = previous {
                    assert!(summary.visibility < prev_vis);
                    assert!(summary.fwhm_paper_ps > prev_width);
                    assert!(expected_vis < prev_vis);
                    assert!(expected_width > prev_width);
                }
                previous = Some((expected_vis, expected_width));
            }
        }
    }

    #[test]
    fn compensated_pair_restores_the_reference_dip() {
        let grid = interference_grid(4096, 20.0, 1200.0, 0.0).unwrap();
        let spec = PulseSpec::new(20.0);
        let compensated = ComplexEnvelope::precompensated_gaussian(grid, &spec, 1200.0)
            .unwrap()
            .propagate(1200.0);
        let plain = ComplexEnvelope::gaussian(grid, &spec).unwrap();
        let delays = auto_delays(&compensated, &plain, 201).unwrap();
        let curve =
            coincidence_curve(&compensated, &plain, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let summary = curve.summarize().unwrap();
        assert!((summary.visibility - 0.5).abs() < 1e-3);
        assert!((summary.fwhm_paper_ps - 67.9457).abs() < 0.5);
    }

    #[test]
    fn summary_rejects_degenerate_curves() {
        let delays: Vec<f64> = (0..201).map(|i| i as f64 - 100.0).collect();
        let flat = CoincidenceCurve::new(delays.clone(), vec![1.0; 201], 1.0).unwrap();
        assert!(matches!(flat.summarize(), Err(Error::Estimation(_))));

        // Monotone curve: the minimum sits at the window edge.
        let rising: Vec<f64> = (0..201).map(|i| 0.5 + 0.0025 * i as f64).collect();
        let edge = CoincidenceCurve::new(delays.clone(), rising, 1.0).unwrap();
        assert!(matches!(edge.summarize(), Err(Error::Estimation(_))));

        let short = CoincidenceCurve::new(delays[..32].to_vec(), vec![1.0; 32], 1.0).unwrap();
        assert!(matches!(short.summarize(), Err(Error::Estimation(_))));
    }

    #[test]
    fn curve_construction_validates_inputs() {
        assert!(matches!(
            CoincidenceCurve::new(vec![0.0, 0.0], vec![1.0, 1.0], 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            CoincidenceCurve::new(vec![0.0, 1.0], vec![1.0, -0.5], 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            CoincidenceCurve::new(vec![0.0, 1.0], vec![1.0], 1.0),
            Err(Error::InvalidInput(_))
        ));
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        assert!(matches!(
            coincidence_curve(&a, &b, &[0.0, 1.0], 1.5),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            coincidence_curve(&a, &b, &[], 0.5),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn poisson_noise_is_seed_deterministic() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let first = curve.with_poisson_noise(1e5, 42).unwrap();
        let second = curve.with_poisson_noise(1e5, 42).unwrap();
        assert_eq!(first, second);
        let third = curve.with_poisson_noise(1e5, 43).unwrap();
        assert_ne!(first, third);
    }

    #[test]
    fn poisson_noise_converges_with_count_rate() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let noisy = curve.with_poisson_noise(1e8, 7).unwrap();
        let max_deviation = curve
            .coincidence()
            .iter()
            .zip(noisy.coincidence())
            .map(|(clean, noisy)| (clean - noisy).abs())
            .fold(0.0, f64::max);
        assert!(
            max_deviation < 1e-3,
            "max per-bin deviation {max_deviation:.2e} at 1e8 counts"
        );
    }

    #[test]
    fn poisson_noise_keeps_visibility_within_band_for_most_seeds() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        let curve = coincidence_curve(&a, &b, &delays, COHERENT_VISIBILITY_CEILING).unwrap();
        let mut in_band = 0;
        for seed in 0..100 {
            let summary = curve
                .with_poisson_noise(1e5, seed)
                .unwrap()
                .summarize()
                .unwrap();
            if (summary.visibility - 0.5).abs() <= 0.01 {
                in_band += 1;
            }
        }
        assert!(in_band >= 95, "only {in_band} of 100 seeds inside the band");
    }

    #[test]
    fn analytic_references_validate_their_domain() {
        assert!(matches!(
            analytic_visibility(0.0, 100.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            analytic_fwhm(-3.0, 100.0),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(analytic_visibility(20.0, 0.0).unwrap(), 0.5);
        assert_eq!(
            analytic_fwhm(20.0, -1200.0).unwrap(),
            analytic_fwhm(20.0, 1200.0).unwrap()
        );
    }

    #[test]
    fn auto_delays_center_on_zero_and_scale_with_the_dip() {
        let (a, b) = gaussian_pair(20.0, 0.0, 0.0);
        let delays = auto_delays(&a, &b, 201).unwrap();
        assert_eq!(delays.len(), 201);
        assert_eq!(delays[100], 0.0);
        assert!(delays.windows(2).all(|w| w[1] > w[0]));
        let expected_reach = 4.0 * analytic_fwhm(20.0, 0.0).unwrap();
        assert!((delays[200] - expected_reach).abs() < 0.02 * expected_reach);
        assert_eq!(delays[0], -delays[200]);
    }
}
