//! Scenario configuration schema (TOML), field-path diagnostics, and the
//! bundled scenario library.

use serde::{Deserialize, Serialize};

use crate::detection::{LoPhase, MeasurementConfig, TraceChannel};
use crate::error::{Error, Result};

/// Full description of one experiment run: source, optical chain, detector,
/// acquisition settings, and requested outputs. All lengths are meters,
/// frequencies Hz, angles radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub source: SourceConfig,
    #[serde(default)]
    pub chain: Vec<ChainElement>,
    pub detector: DetectorConfig,
    pub measurement: MeasurementSettings,
    pub analysis: AnalysisConfig,
}

/// Two squeezed-thermal sources feeding the HG10 and HG01 modes. The second
/// source's squeezing ellipse is rotated by `relative_phase_rad` to model the
/// residual phase between the two fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub squeezing_db: [f64; 2],
    pub antisqueezing_db: [f64; 2],
    #[serde(default)]
    pub relative_phase_rad: f64,
}

/// Ordered optical elements between the source and the detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainElement {
    /// Mode-matched symmetric cylindrical-lens pair; applies the first-order
    /// differential Gouy phase to the HG10 mode.
    GouyShifter { focal_length_m: f64, separation_m: f64 },
    /// Rotation of the spatial basis (equivalently a beamsplitter of
    /// transmittance cos^2 theta between the two modes).
    BasisRotation { theta_rad: f64 },
    /// Symmetric propagation loss on both modes.
    Loss { eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorGeometry {
    /// Lossless mode-matched homodyne readout of both channels.
    Ideal,
    /// Quadrant detector with a TEM00 local oscillator; channel efficiencies
    /// come from the flipped-mode overlap integrals.
    Quadrant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub geometry: DetectorGeometry,
    #[serde(default = "default_lo_waist")]
    pub lo_waist_m: f64,
    #[serde(default)]
    pub rotation_rad: f64,
}

fn default_lo_waist() -> f64 {
    1.0e-3
}

/// Acquisition settings; `scan = true` ramps the LO phase linearly over one
/// full turn starting at `lo_phase_rad`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSettings {
    pub scan: bool,
    #[serde(default)]
    pub lo_phase_rad: f64,
    pub analysis_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    #[serde(default = "default_segment")]
    pub segment_s: f64,
    pub seed: u64,
    #[serde(default)]
    pub electronic_noise: f64,
}

fn default_segment() -> f64 {
    1.0e-3
}

impl MeasurementSettings {
    pub fn to_measurement_config(&self) -> MeasurementConfig {
        MeasurementConfig {
            lo_phase: if self.scan {
                LoPhase::Scan { start: self.lo_phase_rad }
            } else {
                LoPhase::Fixed(self.lo_phase_rad)
            },
            analysis_frequency_hz: self.analysis_frequency_hz,
            bandwidth_hz: self.bandwidth_hz,
            sample_rate_hz: self.sample_rate_hz,
            duration_s: self.duration_s,
            segment_s: self.segment_s,
            seed: self.seed,
            electronic_noise: self.electronic_noise,
            lo_blocked: false,
        }
    }
}

/// Which outputs a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub channels: Vec<TraceChannel>,
    /// Additional x-basis rotations (Dove-prism style LO rotations), each
    /// traced as its own channel.
    #[serde(default)]
    pub lo_rotations_rad: Vec<f64>,
    #[serde(default = "default_true")]
    pub analytic_trace: bool,
    #[serde(default)]
    pub monte_carlo: bool,
    #[serde(default)]
    pub inseparability: bool,
    #[serde(default)]
    pub export_timeseries: bool,
}

fn default_true() -> bool {
    true
}

/// One validation finding, addressed by config field path.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Validate a config; an empty list means the scenario is runnable.
pub fn validate(config: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |path: &str, message: String| {
        out.push(Diagnostic { path: path.into(), message });
    };

    if config.name.is_empty() {
        push("name", "scenario name must not be empty".into());
    }
    for i in 0..2 {
        let (s, a) = (config.source.squeezing_db[i], config.source.antisqueezing_db[i]);
        let path_s = format!("source.squeezing_db[{i}]");
        if !s.is_finite() || s > 0.0 {
            push(&path_s, format!("squeezing must be <= 0 dB, got {s}"));
        }
        if !a.is_finite() || a < 0.0 {
            push(&format!("source.antisqueezing_db[{i}]"), format!("antisqueezing must be >= 0 dB, got {a}"));
        }
        if s.is_finite() && a.is_finite() && s + a < 0.0 {
            push(&path_s, format!("unphysical squeezer: {s} dB + {a} dB < 0 puts the variance product below the uncertainty bound"));
        }
    }
    if !config.source.relative_phase_rad.is_finite() {
        push("source.relative_phase_rad", "must be finite".into());
    }

    for (i, el) in config.chain.iter().enumerate() {
        match el {
            ChainElement::GouyShifter { focal_length_m: f, separation_m: d } => {
                if !(*f > 0.0) {
                    push(&format!("chain[{i}].focal_length_m"), format!("must be positive, got {f}"));
                }
                if !(*d > 0.0) || !(*d < 2.0 * f) {
                    push(&format!("chain[{i}].separation_m"), format!("mode matching needs 0 < d < 2f, got d = {d}, f = {f}"));
                }
            }
            ChainElement::BasisRotation { theta_rad } => {
                if !theta_rad.is_finite() {
                    push(&format!("chain[{i}].theta_rad"), "must be finite".into());
                }
            }
            ChainElement::Loss { eta } => {
                if !(0.0..=1.0).contains(eta) {
                    push(&format!("chain[{i}].eta"), format!("transmittance must lie in [0, 1], got {eta}"));
                }
            }
        }
    }

    if config.detector.geometry == DetectorGeometry::Quadrant && !(config.detector.lo_waist_m > 0.0) {
        push("detector.lo_waist_m", format!("must be positive, got {}", config.detector.lo_waist_m));
    }

    if let Err(e) = config.measurement.to_measurement_config().validate() {
        push("measurement", e.to_string());
    }

    let a = &config.analysis;
    if a.channels.is_empty() && a.lo_rotations_rad.is_empty() && !a.inseparability {
        push("analysis", "no outputs requested: add channels, LO rotations, or the inseparability analysis".into());
    }
    if a.inseparability && a.monte_carlo {
        if !config.measurement.scan {
            push("analysis.inseparability", "the trace-based estimate needs a phase scan (measurement.scan = true)".into());
        } else {
            // the diff trace is measured pi/2 later than it is reported, so
            // the sum and diff grids only coincide for 4k segments per turn
            let m = &config.measurement;
            let segments = (m.duration_s / m.segment_s).round() as u64;
            if segments % 4 != 0 {
                push(
                    "measurement.segment_s",
                    format!("{segments} segments per scan; the sum/diff grids align only for a multiple of 4"),
                );
            }
        }
    }
    out
}

macro_rules! bundled_scenarios {
    ($($name:literal => $file:literal),+ $(,)?) => {
        /// Names of the scenarios shipped with the tool.
        pub fn bundled_names() -> Vec<&'static str> {
            vec![$($name),+]
        }

        /// Raw TOML text of a bundled scenario.
        pub fn bundled_text(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../../scenarios/", $file))),)+
                _ => None,
            }
        }
    };
}

bundled_scenarios! {
    "fig1b" => "fig1b.toml",
    "fig1c" => "fig1c.toml",
    "fig3a" => "fig3a.toml",
    "fig3b" => "fig3b.toml",
    "fig3c" => "fig3c.toml",
    "fig3d" => "fig3d.toml",
    "fig3d_ideal" => "fig3d_ideal.toml",
    "paper_calibrated" => "paper_calibrated.toml",
}

/// Parse a bundled scenario by name.
pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    bundled_text(name).map(|text| toml::from_str(text).expect("bundled scenario parses"))
}

/// Load a config from a file path, falling back to the bundled library when
/// the argument names a bundled scenario and no such file exists.
pub fn load_config(path_or_name: &str) -> Result<ScenarioConfig> {
    let path = std::path::Path::new(path_or_name);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return Ok(toml::from_str(&text)?);
    }
    bundled(path_or_name).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "`{path_or_name}` is neither a config file nor a bundled scenario \
             (available: {})",
            bundled_names().join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ScenarioConfig {
        ScenarioConfig {
            name: "test".into(),
            description: String::new(),
            source: SourceConfig {
                squeezing_db: [-4.0, -4.0],
                antisqueezing_db: [6.5, 6.5],
                relative_phase_rad: 0.0,
            },
            chain: vec![],
            detector: DetectorConfig {
                geometry: DetectorGeometry::Ideal,
                lo_waist_m: 1e-3,
                rotation_rad: 0.0,
            },
            measurement: MeasurementSettings {
                scan: true,
                lo_phase_rad: 0.0,
                analysis_frequency_hz: 4.8e6,
                bandwidth_hz: 1.0e5,
                sample_rate_hz: 2.0e7,
                duration_s: 0.1,
                segment_s: 1.0e-3,
                seed: 1,
                electronic_noise: 0.0,
            },
            analysis: AnalysisConfig {
                channels: vec![TraceChannel::X],
                lo_rotations_rad: vec![],
                analytic_trace: true,
                monte_carlo: false,
                inseparability: false,
                export_timeseries: false,
            },
        }
    }

    #[test]
    fn minimal_config_validates() {
        assert!(validate(&minimal()).is_empty());
    }

    #[test]
    fn unphysical_squeezer_is_diagnosed() {
        let mut cfg = minimal();
        cfg.source.squeezing_db[0] = -1.8;
        cfg.source.antisqueezing_db[0] = 1.7;
        let diags = validate(&cfg);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].path, "source.squeezing_db[0]");
    }

    #[test]
    fn nyquist_violation_is_diagnosed() {
        let mut cfg = minimal();
        cfg.measurement.bandwidth_hz = 3.0e7;
        let diags = validate(&cfg);
        assert!(diags.iter().any(|d| d.path == "measurement"));
    }

    #[test]
    fn chain_elements_are_checked() {
        let mut cfg = minimal();
        cfg.chain = vec![
            ChainElement::GouyShifter { focal_length_m: 0.25, separation_m: 0.6 },
            ChainElement::Loss { eta: 1.3 },
        ];
        let diags = validate(&cfg);
        assert!(diags.iter().any(|d| d.path == "chain[0].separation_m"));
        assert!(diags.iter().any(|d| d.path == "chain[1].eta"));
    }

    #[test]
    fn all_bundled_scenarios_parse_and_validate() {
        for name in bundled_names() {
            let cfg = bundled(name).unwrap();
            assert_eq!(cfg.name, name);
            let diags = validate(&cfg);
            assert!(diags.is_empty(), "{name}: {diags:?}");
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = bundled("fig1b").unwrap();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: ScenarioConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
