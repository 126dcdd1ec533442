//! Configuration-driven scenario runner: assembles the optical chain, writes
//! analytic and Monte Carlo variance traces as CSV, evaluates the
//! inseparability criterion, and emits a reproducible run report.

pub mod calibrate;
pub mod config;

pub use config::{
    bundled, bundled_names, bundled_text, load_config, validate, AnalysisConfig, ChainElement,
    DetectorConfig, DetectorGeometry, Diagnostic, MeasurementSettings, ScenarioConfig,
    SourceConfig,
};

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::detection::{
    self, analytic_trace_dense, detected_state, simulate_photocurrents, ChannelSpec,
    FilteredRecord, TraceChannel, VarianceTrace, MODE_X, MODE_Y,
};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeLabel, SqueezerSpec};
use crate::metrics::{inseparability_analytic, inseparability_from_traces, InseparabilityResult};
use crate::modes::{
    detector_efficiencies, CylLensSystem, DetectorEfficiencies, HgMode, LensAxis,
    QuadrantGeometry,
};

/// Grid size of dense analytic traces (covers one full turn and lands exactly
/// on the quadrature extrema of an unrotated squeezer).
pub const ANALYTIC_GRID: usize = 1024;

/// Run-time overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    /// Force-disable the Monte Carlo stage.
    pub no_monte_carlo: bool,
}

/// Everything a run produced, in memory plus the paths written to disk.
#[derive(Debug)]
pub struct RunArtifacts {
    pub report: RunReport,
    /// Monte Carlo traces (empty without the Monte Carlo stage).
    pub monte_carlo_traces: Vec<VarianceTrace>,
    /// Dense analytic traces.
    pub analytic_traces: Vec<VarianceTrace>,
    pub inseparability_analytic: Option<InseparabilityResult>,
    pub inseparability_monte_carlo: Option<InseparabilityResult>,
    /// Resolved chain state just before the detector.
    pub state: GaussianState,
    pub efficiencies: DetectorEfficiencies,
}

/// Reproducibility record: re-running the echoed config with the recorded
/// seed regenerates byte-identical outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub tool_version: String,
    pub seed: u64,
    pub files: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inseparability_analytic: Option<InseparabilityResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inseparability_monte_carlo: Option<InseparabilityResult>,
    pub config: ScenarioConfig,
}

/// Build the pre-detector Gaussian state and the detector efficiencies from a
/// validated config.
pub fn build_state(config: &ScenarioConfig) -> Result<(GaussianState, DetectorEfficiencies)> {
    let mut state = GaussianState::vacuum(vec![ModeLabel::hg(1, 0), ModeLabel::hg(0, 1)])?;
    let src = &config.source;
    state = state.apply_squeezed_thermal(
        MODE_X,
        &SqueezerSpec::new(src.squeezing_db[0], src.antisqueezing_db[0], 0.0),
    )?;
    state = state.apply_squeezed_thermal(
        MODE_Y,
        &SqueezerSpec::new(src.squeezing_db[1], src.antisqueezing_db[1], src.relative_phase_rad),
    )?;
    for element in &config.chain {
        state = match *element {
            ChainElement::GouyShifter { focal_length_m, separation_m } => {
                let system =
                    CylLensSystem::mode_matched(focal_length_m, separation_m, LensAxis::X)?;
                let differential = system.gouy_phases()?.first_order_differential();
                state.apply_phase(MODE_X, differential)?
            }
            ChainElement::BasisRotation { theta_rad } => {
                state.apply_basis_rotation(MODE_X, MODE_Y, theta_rad)?
            }
            ChainElement::Loss { eta } => {
                state.apply_loss(MODE_X, eta)?.apply_loss(MODE_Y, eta)?
            }
        };
    }
    let eff = match config.detector.geometry {
        DetectorGeometry::Ideal => DetectorEfficiencies::ideal(),
        DetectorGeometry::Quadrant => {
            let lo = HgMode::new(0, 0, config.detector.lo_waist_m)?;
            let geometry = QuadrantGeometry {
                rotation: config.detector.rotation_rad,
                offset: (0.0, 0.0),
            };
            detector_efficiencies(&geometry, &lo)?
        }
    };
    Ok((state, eff))
}

/// The channels a run traces: explicit selections, LO rotations, and the
/// sum/diff pair whenever the trace-based inseparability estimate needs it.
fn channel_plan(config: &ScenarioConfig) -> Vec<ChannelSpec> {
    let a = &config.analysis;
    let mut specs: Vec<ChannelSpec> =
        a.channels.iter().map(|&c| ChannelSpec::from_trace_channel(c)).collect();
    for &alpha in &a.lo_rotations_rad {
        specs.push(ChannelSpec::rotated(alpha));
    }
    if a.inseparability && a.monte_carlo && config.measurement.scan {
        for c in [TraceChannel::Sum, TraceChannel::Diff] {
            let spec = ChannelSpec::from_trace_channel(c);
            if !specs.iter().any(|s| s.name == spec.name) {
                specs.push(spec);
            }
        }
    }
    specs
}

/// Execute one scenario and write its artifacts under `opts.out_dir`.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunArtifacts> {
    let mut resolved = config.clone();
    if let Some(seed) = opts.seed {
        resolved.measurement.seed = seed;
    }
    if opts.no_monte_carlo {
        resolved.analysis.monte_carlo = false;
    }
    let diagnostics = validate(&resolved);
    if !diagnostics.is_empty() {
        let text: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(Error::InvalidConfig(text.join("; ")));
    }

    let (state, eff) = build_state(&resolved)?;
    let detected = detected_state(&state, &eff)?;
    let mcfg = resolved.measurement.to_measurement_config();
    let v_el = resolved.measurement.electronic_noise;
    let specs = channel_plan(&resolved);

    let mut analytic_traces = Vec::new();
    if resolved.analysis.analytic_trace {
        for spec in &specs {
            analytic_traces.push(analytic_trace_dense(
                &detected,
                spec,
                resolved.measurement.lo_phase_rad,
                ANALYTIC_GRID,
                v_el,
            )?);
        }
    }

    let mut monte_carlo_traces = Vec::new();
    if resolved.analysis.monte_carlo {
        let record = simulate_photocurrents(&state, &eff, &mcfg)?;
        let filtered = FilteredRecord::new(&record, &mcfg)?;
        for spec in &specs {
            if resolved.measurement.scan {
                monte_carlo_traces.push(filtered.windowed_trace(spec)?);
            } else {
                monte_carlo_traces.push(VarianceTrace {
                    channel: spec.name.clone(),
                    phi_rad: vec![resolved.measurement.lo_phase_rad],
                    variance_snu: vec![filtered.fixed_variance(spec)?],
                });
            }
        }
        if resolved.analysis.export_timeseries {
            let path = opts.out_dir.join(format!("{}_timeseries.csv", resolved.name));
            write_file(&path, |w| record.write_csv(w))?;
        }
    }

    let inseparability_an = if resolved.analysis.inseparability {
        Some(inseparability_analytic(&detected, MODE_X, MODE_Y, v_el)?)
    } else {
        None
    };
    let inseparability_mc = if resolved.analysis.inseparability && resolved.analysis.monte_carlo {
        let find = |name: &str| monte_carlo_traces.iter().find(|t| t.channel == name);
        match (find("sum"), find("diff")) {
            (Some(sum), Some(diff)) => Some(inseparability_from_traces(sum, diff, v_el)?),
            _ => None,
        }
    } else {
        None
    };

    fs::create_dir_all(&opts.out_dir)?;
    let mut files = BTreeMap::new();

    if !analytic_traces.is_empty() || !monte_carlo_traces.is_empty() {
        let name = format!("{}_traces.csv", resolved.name);
        let mut all: Vec<VarianceTrace> = monte_carlo_traces.clone();
        all.extend(analytic_traces.iter().cloned());
        write_file(&opts.out_dir.join(&name), |w| detection::write_traces_csv(&all, w))?;
        files.insert("traces".into(), name);
    }
    if let Some(res) = &inseparability_an {
        let name = format!("{}_inseparability_analytic.csv", resolved.name);
        write_file(&opts.out_dir.join(&name), |w| res.write_csv(w))?;
        files.insert("inseparability_analytic".into(), name);
    }
    if let Some(res) = &inseparability_mc {
        let name = format!("{}_inseparability_montecarlo.csv", resolved.name);
        write_file(&opts.out_dir.join(&name), |w| res.write_csv(w))?;
        files.insert("inseparability_montecarlo".into(), name);
    }
    if resolved.analysis.monte_carlo && resolved.analysis.export_timeseries {
        files.insert("timeseries".into(), format!("{}_timeseries.csv", resolved.name));
    }

    let report = RunReport {
        scenario: resolved.name.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: resolved.measurement.seed,
        files,
        inseparability_analytic: inseparability_an.clone(),
        inseparability_monte_carlo: inseparability_mc.clone(),
        config: resolved.clone(),
    };
    let report_name = format!("{}_report.toml", resolved.name);
    let report_text = toml::to_string_pretty(&report)?;
    fs::write(opts.out_dir.join(&report_name), report_text)?;

    Ok(RunArtifacts {
        report,
        monte_carlo_traces,
        analytic_traces,
        inseparability_analytic: inseparability_an,
        inseparability_monte_carlo: inseparability_mc,
        state,
        efficiencies: eff,
    })
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    f(&mut file)?;
    Ok(())
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Corrected inseparability at the optimal phase.
    pub i: f64,
    pub v_sum: f64,
    pub v_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV export: `value,I,V_sum,V_diff`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "value,I,V_sum,V_diff")?;
        for row in &self.rows {
            writeln!(w, "{},{},{},{}", row.value, row.i, row.v_sum, row.v_diff)?;
        }
        Ok(())
    }
}

/// Run the analytic pipeline once per parameter value, patching the scalar at
/// `path` (dot-separated keys with numeric indices for arrays, e.g.
/// `source.relative_phase_rad` or `chain.2.eta`).
pub fn sweep(config: &ScenarioConfig, path: &str, values: &[f64]) -> Result<SweepTable> {
    let mut table = SweepTable { parameter: path.into(), rows: Vec::new() };
    for &value in values {
        let patched = patch_scalar(config, path, value)?;
        let diagnostics = validate(&patched);
        if !diagnostics.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{path} = {value}: {}",
                diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
            )));
        }
        let (state, eff) = build_state(&patched)?;
        let detected = detected_state(&state, &eff)?;
        let res = inseparability_analytic(
            &detected,
            MODE_X,
            MODE_Y,
            patched.measurement.electronic_noise,
        )?;
        table.rows.push(SweepRow {
            value,
            i: res.i_corrected,
            v_sum: res.v_sum,
            v_diff: res.v_diff,
        });
    }
    Ok(table)
}

/// Set one scalar field in the config by path, going through the TOML value
/// tree so the path syntax matches the file format.
fn patch_scalar(config: &ScenarioConfig, path: &str, value: f64) -> Result<ScenarioConfig> {
    let mut root = toml::Value::try_from(config)?;
    let err = |msg: String| Error::InvalidParameter(format!("parameter path `{path}`: {msg}"));
    let segments: Vec<&str> = path.split('.').collect();
    let (last_seg, walk) = segments.split_last().expect("split always yields a segment");

    let mut node: &mut toml::Value = &mut root;
    for seg in walk {
        node = descend(node, seg, &err)?;
    }
    let entry = descend(node, last_seg, &err)?;
    match entry {
        toml::Value::Float(f) => *f = value,
        toml::Value::Integer(_) => *entry = toml::Value::Float(value),
        other => return Err(err(format!("target is not a scalar but {}", other.type_str()))),
    }
    Ok(root.try_into()?)
}

fn descend<'a>(
    node: &'a mut toml::Value,
    seg: &str,
    err: &impl Fn(String) -> Error,
) -> Result<&'a mut toml::Value> {
    match node {
        toml::Value::Table(map) => {
            map.get_mut(seg).ok_or_else(|| err(format!("no field `{seg}`")))
        }
        toml::Value::Array(items) => {
            let idx: usize =
                seg.parse().map_err(|_| err(format!("`{seg}` is not an array index")))?;
            items.get_mut(idx).ok_or_else(|| err(format!("index {idx} out of range")))
        }
        _ => Err(err(format!("`{seg}` cannot be descended into"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sweep_over_empty_values_is_empty() {
        let cfg = bundled("paper_calibrated").unwrap();
        let table = sweep(&cfg, "source.relative_phase_rad", &[]).unwrap();
        assert!(table.rows.is_empty());
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "value,I,V_sum,V_diff\n");
    }

    #[test]
    fn sweep_rejects_unresolvable_paths() {
        let cfg = bundled("paper_calibrated").unwrap();
        assert!(matches!(
            sweep(&cfg, "source.nonsense", &[0.1]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            sweep(&cfg, "name", &[0.1]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sweep_phase_offset_is_monotone() {
        let cfg = bundled("paper_calibrated").unwrap();
        let table =
            sweep(&cfg, "source.relative_phase_rad", &[0.0, PI / 14.0, PI / 7.0]).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows[0].i < table.rows[1].i);
        assert!(table.rows[1].i < table.rows[2].i);
    }

    #[test]
    fn patch_scalar_reaches_array_elements() {
        let cfg = bundled("paper_calibrated").unwrap();
        let patched = patch_scalar(&cfg, "source.squeezing_db.0", -3.0).unwrap();
        assert_relative_eq!(patched.source.squeezing_db[0], -3.0);
        assert_eq!(patched.source.squeezing_db[1], cfg.source.squeezing_db[1]);
    }

    #[test]
    fn gouy_shifter_applies_a_quarter_turn() {
        // the bundled converter geometry swaps the x-mode quadratures
        let cfg = bundled("fig3d_ideal").unwrap();
        let (state, _) = build_state(&cfg).unwrap();
        // after the full chain the state is entangled; spot-check physicality
        assert!(state.is_physical());
    }
}
