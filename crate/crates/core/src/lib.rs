//! Simulation and analysis engine for dispersion pre-compensation on
//! asymmetric two-photon interference links.
//!
//! A measurement node interferes weak pulses arriving from two parties over
//! fibre arms of different lengths. Chromatic dispersion broadens the pulses
//! by different amounts, which degrades the Hong–Ou–Mandel interference dip
//! that the link's security analysis relies on. This crate models the full
//! chain needed to study and correct that degradation:
//!
//! * [`signal`] — time grids, Gaussian pulse synthesis, dispersive
//!   propagation, exact spectral pre-compensation, and the intensity/phase
//!   drive waveforms an electro-optic modulator pair would need to produce a
//!   pre-compensated pulse.
//! * [`hom`] — two-pulse overlap integrals, coincidence-dip curves, dip
//!   summaries (visibility and width), closed-form references for Gaussian
//!   pulses, and Poisson counting noise.
//! * [`estimator`] — inversion of dip width or visibility into the dispersion
//!   asymmetry between the arms, and the blind protocol that decides which
//!   party should apply pre-compensation without revealing fibre parameters.
//! * [`keyrate`] — the photon-statistics layer: Bell-state measurement
//!   outcome probabilities, X-basis error rates, detection gains, secret-key
//!   rates, and rate-versus-distance sweeps.
//!
//! Units are picoseconds for time, ps² for accumulated group-velocity
//! dispersion, ps²/km for the fibre dispersion coefficient, and km for fibre
//! length throughout.
//!
//! # Example
//!
//! ```
//! use dispcomp_core::signal::{relative_l2_distance, ComplexEnvelope, PulseSpec, TimeGrid};
//!
//! // A 20 ps pulse, pre-chirped for 60 km of 20 ps²/km fibre, arrives intact.
//! let grid = TimeGrid::for_pulse(4096, 20.0, 1200.0).unwrap();
//! let spec = PulseSpec::new(20.0);
//! let source = ComplexEnvelope::gaussian(grid, &spec).unwrap();
//! let launched = source.precompensate(1200.0);
//! let arrived = launched.propagate(1200.0);
//! assert!(relative_l2_distance(&arrived, &source).unwrap() < 1e-9);
//! ```

pub mod error;
pub mod estimator;
pub mod hom;
pub mod keyrate;
pub mod signal;

pub use error::{Error, Result};
