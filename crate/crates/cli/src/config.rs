//! Run configuration: one JSON file plus dotted-path overrides.
//!
//! Every tunable lives in a single [`Config`] tree so that a run is fully
//! reproducible from one artifact. Missing keys fall back to the documented
//! defaults, unknown keys are rejected, and validation failures name the
//! offending key path.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use dispcomp_core::estimator::AsymmetryRoute;
use dispcomp_core::keyrate::SystemParams;
use dispcomp_core::signal::FiberSpec;

/// Simulation knobs shared by the curve-producing subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    /// Samples per time grid; a power of two, at least 16.
    pub n_samples: usize,
    /// Fixed time-grid span in ps; `None` sizes the grid automatically from
    /// the pulse and dispersion at hand.
    pub span_ps: Option<f64>,
    /// Lower end of a fixed delay scan in ps; `None` scans automatically
    /// around the dip. Must be set together with `delay_max_ps`.
    pub delay_min_ps: Option<f64>,
    /// Upper end of a fixed delay scan in ps.
    pub delay_max_ps: Option<f64>,
    /// Number of delay samples per coincidence curve.
    pub delay_steps: usize,
    /// RNG seed for noisy runs; the `--seed` flag overrides it. Required
    /// whenever `counts_per_bin` is set — noisy runs draw no entropy from
    /// the environment.
    pub seed: Option<u64>,
    /// Mean baseline coincidence counts per delay bin; `None` keeps curves
    /// noiseless.
    pub counts_per_bin: Option<f64>,
    /// Selection-metric difference below which the protocol reports an
    /// inconclusive verdict.
    pub tie_threshold: f64,
    /// Observable the asymmetry estimate is inverted from.
    pub alpha_route: AsymmetryRoute,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            n_samples: 4096,
            span_ps: None,
            delay_min_ps: None,
            delay_max_ps: None,
            delay_steps: 201,
            seed: None,
            counts_per_bin: None,
            tie_threshold: 0.05,
            alpha_route: AsymmetryRoute::default(),
        }
    }
}

/// Complete configuration of a run.
///
/// The default configuration describes the worked asymmetric link used
/// throughout this project: a 20 ps source, a short reference arm at
/// Alice's side (`fiber_a`, 0 km), and a 60 km dispersive arm at Bob's side
/// (`fiber_b`), both with 20 ps²/km dispersion and 0.2 dB/km loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Source, detector, and security parameters.
    pub system: SystemParams,
    /// Alice's arm.
    pub fiber_a: FiberSpec,
    /// Bob's arm.
    pub fiber_b: FiberSpec,
    /// Simulation knobs.
    pub sim: SimSettings,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            system: SystemParams::default(),
            fiber_a: FiberSpec::default(),
            fiber_b: FiberSpec {
                length_km: 60.0,
                ..FiberSpec::default()
            },
            sim: SimSettings::default(),
        }
    }
}

impl Config {
    /// Checks every block, reporting violations with their key path.
    pub fn validate(&self) -> Result<()> {
        self.system
            .validate()
            .map_err(|err| anyhow!("system.{err_text}", err_text = strip_prefix(&err)))?;
        self.fiber_a
            .validate()
            .map_err(|err| anyhow!("fiber_a.{err_text}", err_text = strip_prefix(&err)))?;
        self.fiber_b
            .validate()
            .map_err(|err| anyhow!("fiber_b.{err_text}", err_text = strip_prefix(&err)))?;
        self.validate_sim()
    }

    fn validate_sim(&self) -> Result<()> {
        let sim = &self.sim;
        if sim.n_samples < 16 || !sim.n_samples.is_power_of_two() {
            bail!(
                "sim.n_samples must be a power of two of at least 16, got {}",
                sim.n_samples
            );
        }
        if let Some(span) = sim.span_ps {
            if !span.is_finite() || span <= 0.0 {
                bail!("sim.span_ps must be positive and finite, got {span}");
            }
        }
        match (sim.delay_min_ps, sim.delay_max_ps) {
            (None, None) => {}
            (Some(min), Some(max)) => {
                if !min.is_finite() || !max.is_finite() || min >= max {
                    bail!("sim.delay_min_ps must be below sim.delay_max_ps, got {min} and {max}");
                }
            }
            _ => bail!("sim.delay_min_ps and sim.delay_max_ps must be set together"),
        }
        // The curve summary needs enough samples for a baseline band on each
        // side of the dip.
        if sim.delay_steps < dispcomp_core::hom::MIN_SUMMARY_SAMPLES {
            bail!(
                "sim.delay_steps must be at least {}, got {}",
                dispcomp_core::hom::MIN_SUMMARY_SAMPLES,
                sim.delay_steps
            );
        }
        if let Some(counts) = sim.counts_per_bin {
            if !counts.is_finite() || counts <= 0.0 {
                bail!("sim.counts_per_bin must be positive and finite, got {counts}");
            }
        }
        if !sim.tie_threshold.is_finite() || sim.tie_threshold < 0.0 {
            bail!(
                "sim.tie_threshold must be non-negative, got {}",
                sim.tie_threshold
            );
        }
        Ok(())
    }
}

/// The library's messages for config-shaped types already lead with the
/// offending field name; drop the error-category prefix so the key path
/// reads as `block.field ...`.
fn strip_prefix(err: &dispcomp_core::Error) -> String {
    let text = err.to_string();
    match text.split_once(": ") {
        Some((_, rest)) => rest.to_string(),
        None => text,
    }
}

/// Loads, overrides, and validates a configuration.
///
/// `path = None` starts from the built-in defaults (equivalent to an empty
/// JSON object). Each `KEY=VALUE` override addresses a key by its dotted
/// path; the value is parsed as JSON when possible and as a bare string
/// otherwise.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut tree = match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("{} is not valid JSON", path.display()))?
        }
        None => serde_json::Value::Object(serde_json::Map::new()),
    };
    for assignment in overrides {
        apply_override(&mut tree, assignment)?;
    }
    let config: Config = serde_path_to_error::deserialize(tree)
        .map_err(|err| anyhow!("{}: {}", err.path(), err.inner()))?;
    config.validate()?;
    Ok(config)
}

/// Applies one `KEY=VALUE` assignment to the raw JSON tree.
fn apply_override(tree: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (key_path, raw_value) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override '{assignment}' is not of the form KEY=VALUE"))?;
    if key_path.is_empty() {
        bail!("override '{assignment}' has an empty key path");
    }
    let value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));

    let mut node = tree;
    let mut segments = key_path.split('.').peekable();
    while let Some(segment) = segments.next() {
        if segment.is_empty() {
            bail!("override key path '{key_path}' has an empty segment");
        }
        let object = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("override key path '{key_path}' descends into a non-object"))?;
        if segments.peek().is_none() {
            object.insert(segment.to_string(), value);
            return Ok(());
        }
        node = object
            .entry(segment.to_string())
            .or_insert_with(|| serde_json::Value::Object(serde_json::Map::new()));
    }
    unreachable!("split always yields at least one segment");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_yields_the_documented_defaults() {
        let config = load(None, &[]).unwrap();
        assert_eq!(config.system.t0_ps, 20.0);
        assert_eq!(config.system.v_max, 0.5);
        assert_eq!(config.system.f_ec, 1.14);
        assert_eq!(config.fiber_a.length_km, 0.0);
        assert_eq!(config.fiber_b.length_km, 60.0);
        assert_eq!(config.fiber_b.beta2_ps2_per_km, 20.0);
        assert_eq!(config.sim.n_samples, 4096);
        assert_eq!(config.sim.delay_steps, 201);
        assert_eq!(config.sim.tie_threshold, 0.05);
        assert_eq!(config.sim.counts_per_bin, None);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let overrides = vec![
            "system.t0_ps=10".to_string(),
            "fiber_b.length_km=25.5".to_string(),
            "sim.seed=7".to_string(),
            "sim.alpha_route=visibility".to_string(),
        ];
        let config = load(None, &overrides).unwrap();
        assert_eq!(config.system.t0_ps, 10.0);
        assert_eq!(config.fiber_b.length_km, 25.5);
        assert_eq!(config.sim.seed, Some(7));
        assert_eq!(config.sim.alpha_route, AsymmetryRoute::Visibility);
    }

    #[test]
    fn violations_name_their_key_path() {
        let err = load(None, &["system.t0_ps=-5".to_string()]).unwrap_err();
        assert!(err.to_string().contains("system.t0_ps"), "got: {err}");

        let err = load(None, &["fiber_b.length_km=-1".to_string()]).unwrap_err();
        assert!(err.to_string().contains("fiber_b.length_km"), "got: {err}");

        let err = load(None, &["sim.delay_steps=10".to_string()]).unwrap_err();
        assert!(err.to_string().contains("sim.delay_steps"), "got: {err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load(None, &["system.bogus=1".to_string()]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("bogus"), "got: {text}");
        assert!(text.contains("system"), "got: {text}");
    }

    #[test]
    fn type_mismatches_name_their_key_path() {
        let err = load(None, &["sim.n_samples=many".to_string()]).unwrap_err();
        assert!(err.to_string().contains("sim.n_samples"), "got: {err}");
    }

    #[test]
    fn half_open_delay_window_is_rejected() {
        let err = load(None, &["sim.delay_min_ps=-100".to_string()]).unwrap_err();
        assert!(err.to_string().contains("delay_max_ps"), "got: {err}");
    }

    #[test]
    fn parsed_config_round_trips_identically() {
        let overrides = vec![
            "system.mu_a=0.4".to_string(),
            "fiber_b.length_km=42".to_string(),
            "sim.counts_per_bin=1e5".to_string(),
            "sim.seed=3".to_string(),
        ];
        let config = load(None, &overrides).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let reparsed: Config = serde_json::from_str(&json).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn malformed_overrides_are_rejected() {
        assert!(load(None, &["system.t0_ps".to_string()]).is_err());
        assert!(load(None, &["=5".to_string()]).is_err());
        assert!(load(None, &["system..t0_ps=5".to_string()]).is_err());
        assert!(load(None, &["system.t0_ps.inner=5".to_string()]).is_err());
    }
}
