//! Quadrant-detector homodyne measurement as sampled photocurrent time
//! series: shot-noise-limited synthesis with the analytic cross covariance of
//! the detected state, additive electronic noise, brick-wall band-pass
//! filtering at the analysis frequency, pixel-combination arithmetic, and
//! variance estimation against a vacuum calibration record.
//!
//! Synthesis note: the target spectra are flat, so a process whose in-band
//! covariance matches the analytic quadrature covariance is simply white
//! Gaussian noise with that covariance per sample; band limiting happens in
//! the analysis filter exactly as in the experiment's post-processing.

use std::f64::consts::TAU;
use std::io::Write;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::modes::DetectorEfficiencies;

/// Names of the two detection modes carried by every simulated state.
pub const MODE_X: &str = "HG10";
pub const MODE_Y: &str = "HG01";

/// Local-oscillator phase program: fixed, or a linear ramp covering one full
/// turn over the record duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LoPhase {
    Fixed(f64),
    Scan { start: f64 },
}

/// Acquisition settings of one homodyne run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    pub lo_phase: LoPhase,
    pub analysis_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Window length for phase-scan variance estimates.
    pub segment_s: f64,
    pub seed: u64,
    /// Electronic noise variance of each combined channel, expressed as a
    /// fraction of the vacuum calibration variance (so an LO-blocked record
    /// estimates exactly this value).
    pub electronic_noise: f64,
    /// Suppress the optical field entirely, leaving electronic noise only.
    pub lo_blocked: bool,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        MeasurementConfig {
            lo_phase: LoPhase::Scan { start: 0.0 },
            analysis_frequency_hz: 4.8e6,
            bandwidth_hz: 1.0e5,
            sample_rate_hz: 2.0e7,
            duration_s: 0.1,
            segment_s: 1.0e-3,
            seed: 1,
            electronic_noise: 0.05,
            lo_blocked: false,
        }
    }
}

impl MeasurementConfig {
    pub fn validate(&self) -> Result<()> {
        let fs = self.sample_rate_hz;
        let (c, w) = (self.analysis_frequency_hz, self.bandwidth_hz);
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::InvalidConfig(format!("sample rate must be positive, got {fs}")));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {w}")));
        }
        if !(c - w / 2.0 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "analysis band [{:.3e}, {:.3e}] extends below DC",
                c - w / 2.0,
                c + w / 2.0
            )));
        }
        if !(c + w / 2.0 < fs / 2.0) {
            return Err(Error::InvalidConfig(format!(
                "analysis band edge {:.3e} Hz violates Nyquist at fs = {:.3e} Hz",
                c + w / 2.0,
                fs
            )));
        }
        if !(self.duration_s * w >= 100.0) {
            return Err(Error::InvalidConfig(format!(
                "duration x bandwidth = {:.1} < 100: too few independent samples",
                self.duration_s * w
            )));
        }
        if !(0.0..1.0).contains(&self.electronic_noise) {
            return Err(Error::InvalidConfig(format!(
                "electronic noise fraction must lie in [0, 1), got {}",
                self.electronic_noise
            )));
        }
        if matches!(self.lo_phase, LoPhase::Scan { .. }) {
            if !(self.segment_s > 0.0) {
                return Err(Error::InvalidConfig("segment length must be positive".into()));
            }
            if 2.0 * w * self.segment_s < 100.0 {
                return Err(Error::InvalidConfig(format!(
                    "segment too short: {:.0} filtered samples per window (need >= 100)",
                    2.0 * w * self.segment_s
                )));
            }
            if self.duration_s < 2.0 * self.segment_s {
                return Err(Error::InvalidConfig(
                    "scan needs at least two segments per record".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    /// Instantaneous LO phase at sample `t`.
    fn phase_at(&self, t: usize, n: usize) -> f64 {
        match self.lo_phase {
            LoPhase::Fixed(phi) => phi,
            LoPhase::Scan { start } => start + TAU * t as f64 / n as f64,
        }
    }

    fn scan_start(&self) -> Option<f64> {
        match self.lo_phase {
            LoPhase::Scan { start } => Some(start),
            LoPhase::Fixed(_) => None,
        }
    }

    /// Electronic noise variance in shot-noise units (the configured value is
    /// a fraction of the calibration variance, which itself contains the
    /// electronic noise).
    fn electronic_variance_snu(&self) -> f64 {
        self.electronic_noise / (1.0 - self.electronic_noise)
    }
}

/// One acquisition: the four pixel photocurrents, the two derived channels,
/// and the matching vacuum calibration record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSet {
    pub sample_rate_hz: f64,
    pub seed: u64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub calibration: Option<Box<TimeSeriesSet>>,
}

impl TimeSeriesSet {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV export: `time_s,A,B,C,D,x,y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time_s,A,B,C,D,x,y")?;
        for t in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                t as f64 / self.sample_rate_hz,
                self.a[t],
                self.b[t],
                self.c[t],
                self.d[t],
                self.x[t],
                self.y[t]
            )?;
        }
        Ok(())
    }
}

/// Pointwise weighted sum of the four pixel series, evaluated left to right.
/// The gain vectors `(1, 1, -1, -1)` and `(1, -1, 1, -1)` reproduce the
/// stored x and y channels bit-for-bit.
pub fn combine(set: &TimeSeriesSet, gains: &[f64]) -> Result<Vec<f64>> {
    if gains.len() != 4 {
        return Err(Error::InvalidConfig(format!(
            "pixel combination needs 4 gains, got {}",
            gains.len()
        )));
    }
    Ok((0..set.a.len())
        .map(|t| {
            ((gains[0] * set.a[t] + gains[1] * set.b[t]) + gains[2] * set.c[t])
                + gains[3] * set.d[t]
        })
        .collect())
}

/// Deterministic standard-normal sampler (Box-Muller over a counter RNG), so
/// records are bit-reproducible for a fixed seed across platforms.
struct GaussianSampler {
    rng: ChaCha12Rng,
}

impl GaussianSampler {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        GaussianSampler { rng }
    }

    fn uniform_open(&mut self) -> f64 {
        // in (0, 1]: safe under ln()
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.uniform_open().ln()).sqrt();
        let t = TAU * self.uniform();
        (r * t.cos(), r * t.sin())
    }
}

/// Reduced covariance blocks of the two detection modes, for fast evaluation
/// of the 2x2 quadrature covariance at any LO phase.
struct QuadCov {
    aa: [f64; 3],
    bb: [f64; 3],
    ab: [f64; 4],
}

impl QuadCov {
    fn new(state: &GaussianState) -> Result<Self> {
        let ka = 2 * state.mode_index(MODE_X)?;
        let kb = 2 * state.mode_index(MODE_Y)?;
        let cov = state.cov();
        Ok(QuadCov {
            aa: [cov[(ka, ka)], cov[(ka, ka + 1)], cov[(ka + 1, ka + 1)]],
            bb: [cov[(kb, kb)], cov[(kb, kb + 1)], cov[(kb + 1, kb + 1)]],
            ab: [
                cov[(ka, kb)],
                cov[(ka, kb + 1)],
                cov[(ka + 1, kb)],
                cov[(ka + 1, kb + 1)],
            ],
        })
    }

    /// (Var X_a, Var X_b, Cov) at LO phase `phi`.
    fn eval(&self, phi: f64) -> (f64, f64, f64) {
        let (c, s) = (phi.cos(), phi.sin());
        let caa = self.aa[0] * c * c + 2.0 * self.aa[1] * c * s + self.aa[2] * s * s;
        let cbb = self.bb[0] * c * c + 2.0 * self.bb[1] * c * s + self.bb[2] * s * s;
        let cab = self.ab[0] * c * c + (self.ab[1] + self.ab[2]) * c * s + self.ab[3] * s * s;
        (caa, cbb, cab)
    }
}

/// The state actually seen by the detector: the input degraded by the
/// per-channel split-detection efficiencies (residual overlap couples to
/// vacuum).
pub fn detected_state(state: &GaussianState, eff: &DetectorEfficiencies) -> Result<GaussianState> {
    for eta in [eff.eta_x, eff.eta_y] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "detection efficiency must lie in (0, 1], got {eta}"
            )));
        }
    }
    state.apply_loss(MODE_X, eff.eta_x)?.apply_loss(MODE_Y, eff.eta_y)
}

/// Simulate one shot record of the quadrant detector.
///
/// The combined x/y channels are white Gaussian noise whose per-sample cross
/// covariance equals the analytic quadrature covariance of the loss-degraded
/// state at the instantaneous LO phase, plus independent electronic noise.
/// Pixels A..D are reconstructed from the combined channels and two
/// vacuum-level complement combinations. The matching vacuum calibration
/// record (same electronic noise, independent RNG stream) is attached.
pub fn simulate_photocurrents(
    state: &GaussianState,
    eff: &DetectorEfficiencies,
    config: &MeasurementConfig,
) -> Result<TimeSeriesSet> {
    config.validate()?;
    let detected = detected_state(state, eff)?;
    let mut record = synthesize(Some(&QuadCov::new(&detected)?), config, 0)?;
    let vacuum = GaussianState::vacuum(detected.modes().to_vec())?;
    let mut cal_cfg = config.clone();
    cal_cfg.lo_blocked = false;
    let calibration = synthesize(Some(&QuadCov::new(&vacuum)?), &cal_cfg, 1)?;
    record.calibration = Some(Box::new(calibration));
    Ok(record)
}

fn synthesize(cov: Option<&QuadCov>, config: &MeasurementConfig, stream: u64) -> Result<TimeSeriesSet> {
    let n = config.num_samples();
    let mut sampler = GaussianSampler::new(config.seed, stream);
    let e_amp = config.electronic_variance_snu().sqrt();
    let lo = if config.lo_blocked { 0.0 } else { 1.0 };
    let comp_amp = (lo + config.electronic_variance_snu()).sqrt();

    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);

    let fixed = match config.lo_phase {
        LoPhase::Fixed(phi) => Some(cov.map(|q| q.eval(phi))),
        LoPhase::Scan { .. } => None,
    };
    for t in 0..n {
        let (z1, z2) = sampler.pair();
        let (ex, ey) = sampler.pair();
        let (zs, zq) = sampler.pair();
        let (caa, cbb, cab) = match &fixed {
            Some(v) => v.unwrap_or((1.0, 1.0, 0.0)),
            None => cov
                .map(|q| q.eval(config.phase_at(t, n)))
                .unwrap_or((1.0, 1.0, 0.0)),
        };
        // 2x2 Cholesky of the optical covariance
        let l11 = caa.sqrt();
        let l21 = if l11 > 0.0 { cab / l11 } else { 0.0 };
        let l22 = (cbb - l21 * l21).max(0.0).sqrt();
        let x_t = lo * l11 * z1 + e_amp * ex;
        let y_t = lo * (l21 * z1 + l22 * z2) + e_amp * ey;
        let s_t = comp_amp * zs;
        let q_t = comp_amp * zq;
        a.push(0.25 * (s_t + x_t + y_t + q_t));
        b.push(0.25 * (s_t + x_t - y_t - q_t));
        c.push(0.25 * (s_t - x_t + y_t - q_t));
        d.push(0.25 * (s_t - x_t - y_t + q_t));
    }
    let mut set = TimeSeriesSet {
        sample_rate_hz: config.sample_rate_hz,
        seed: config.seed,
        a,
        b,
        c,
        d,
        x: Vec::new(),
        y: Vec::new(),
        calibration: None,
    };
    // derived channels are, by definition, the stated pixel combinations
    set.x = combine(&set, &[1.0, 1.0, -1.0, -1.0])?;
    set.y = combine(&set, &[1.0, -1.0, 1.0, -1.0])?;
    Ok(set)
}

/// Zero-phase brick-wall band-pass: frequency bins with
/// `center - width/2 <= |f| <= center + width/2` pass untouched, everything
/// else is zeroed. Linear and idempotent.
pub fn bandpass(series: &[f64], sample_rate: f64, center: f64, width: f64) -> Result<Vec<f64>> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidConfig(format!("filter width must be positive, got {width}")));
    }
    if !(center + width / 2.0 < sample_rate / 2.0) {
        return Err(Error::InvalidConfig(format!(
            "filter band edge {:.3e} Hz violates Nyquist at fs = {:.3e} Hz",
            center + width / 2.0,
            sample_rate
        )));
    }
    let n = series.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let (lo, hi) = (center - width / 2.0, center + width / 2.0);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = if 2 * k <= n {
            k as f64 * sample_rate / n as f64
        } else {
            (k as f64 - n as f64) * sample_rate / n as f64
        };
        if !(lo..=hi).contains(&f.abs()) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.into_iter().map(|v| v.re * scale).collect())
}

fn sample_variance(series: &[f64]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Variance of a filtered series in shot-noise units: its sample variance
/// divided by the sample variance of the identically filtered vacuum
/// calibration.
pub fn estimate_variance(series: &[f64], calibration: &[f64]) -> Result<f64> {
    let cal = sample_variance(calibration);
    if cal == 0.0 || !cal.is_finite() {
        return Err(Error::CalibrationError(format!(
            "calibration variance is {cal}; need a non-degenerate vacuum record"
        )));
    }
    Ok(sample_variance(series) / cal)
}

/// A homodyne observable built from the two combined channels:
/// `ca * x + cb * y`, read out at LO phase `phi + phase_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub name: String,
    pub ca: f64,
    pub cb: f64,
    /// Phase at which the observable is *measured* relative to the phase at
    /// which it is *reported* (pi/2 for the difference channel convention).
    pub phase_offset: f64,
}

/// Named channel selectors accepted by scenario configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceChannel {
    X,
    Y,
    Sum,
    Diff,
}

impl ChannelSpec {
    pub fn from_trace_channel(ch: TraceChannel) -> Self {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        match ch {
            TraceChannel::X => ChannelSpec { name: "x".into(), ca: 1.0, cb: 0.0, phase_offset: 0.0 },
            TraceChannel::Y => ChannelSpec { name: "y".into(), ca: 0.0, cb: 1.0, phase_offset: 0.0 },
            TraceChannel::Sum => {
                ChannelSpec { name: "sum".into(), ca: inv, cb: inv, phase_offset: 0.0 }
            }
            TraceChannel::Diff => ChannelSpec {
                name: "diff".into(),
                ca: inv,
                cb: -inv,
                phase_offset: std::f64::consts::FRAC_PI_2,
            },
        }
    }

    /// Measurement basis rotated by `alpha` relative to the x channel.
    pub fn rotated(alpha: f64) -> Self {
        ChannelSpec {
            name: format!("x_rot{alpha:.4}"),
            ca: alpha.cos(),
            cb: alpha.sin(),
            phase_offset: 0.0,
        }
    }
}

/// Analytic variance the detector reports on a channel at reported phase
/// `phi`: the optical quadrature variance of the detected state, with the
/// electronic-noise fraction of the calibration folded in.
pub fn analytic_raw_variance(
    detected: &GaussianState,
    spec: &ChannelSpec,
    phi: f64,
    electronic_noise: f64,
) -> Result<f64> {
    let ka = detected.mode_index(MODE_X)?;
    let kb = detected.mode_index(MODE_Y)?;
    let mut coeffs = vec![0.0; detected.num_modes()];
    coeffs[ka] = spec.ca;
    coeffs[kb] = spec.cb;
    let v_opt = detected.quadrature_variance(&coeffs, phi + spec.phase_offset)?;
    Ok(v_opt * (1.0 - electronic_noise) + electronic_noise)
}

/// Variance trace over LO phase for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTrace {
    pub channel: String,
    pub phi_rad: Vec<f64>,
    pub variance_snu: Vec<f64>,
}

/// Trace CSV export: `phi_rad,variance_snu,channel`, one row per point.
pub fn write_traces_csv<W: Write>(traces: &[VarianceTrace], mut w: W) -> Result<()> {
    writeln!(w, "phi_rad,variance_snu,channel")?;
    for trace in traces {
        for (phi, var) in trace.phi_rad.iter().zip(&trace.variance_snu) {
            writeln!(w, "{phi},{var},{}", trace.channel)?;
        }
    }
    Ok(())
}

/// Analytic trace sampled on an explicit phase grid.
pub fn analytic_trace(
    detected: &GaussianState,
    spec: &ChannelSpec,
    phis: &[f64],
    electronic_noise: f64,
) -> Result<VarianceTrace> {
    let variance_snu = phis
        .iter()
        .map(|&phi| analytic_raw_variance(detected, spec, phi, electronic_noise))
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceTrace {
        channel: format!("{}_analytic", spec.name),
        phi_rad: phis.to_vec(),
        variance_snu,
    })
}

/// Analytic trace on a uniform grid of `count` points over one full turn.
pub fn analytic_trace_dense(
    detected: &GaussianState,
    spec: &ChannelSpec,
    start: f64,
    count: usize,
    electronic_noise: f64,
) -> Result<VarianceTrace> {
    let phis: Vec<f64> = (0..count).map(|k| start + TAU * k as f64 / count as f64).collect();
    analytic_trace(detected, spec, &phis, electronic_noise)
}

/// Band-passed combined channels of a record and its calibration, ready for
/// windowed variance estimation. Filtering is linear, so every derived
/// channel is a pointwise combination of the two filtered series.
pub struct FilteredRecord {
    x: Vec<f64>,
    y: Vec<f64>,
    cal_x: Vec<f64>,
    cal_y: Vec<f64>,
    config: MeasurementConfig,
}

impl FilteredRecord {
    pub fn new(record: &TimeSeriesSet, config: &MeasurementConfig) -> Result<Self> {
        config.validate()?;
        let cal = record.calibration.as_deref().ok_or_else(|| {
            Error::CalibrationError("record carries no vacuum calibration".into())
        })?;
        let (fs, c, w) = (
            config.sample_rate_hz,
            config.analysis_frequency_hz,
            config.bandwidth_hz,
        );
        Ok(FilteredRecord {
            x: bandpass(&record.x, fs, c, w)?,
            y: bandpass(&record.y, fs, c, w)?,
            cal_x: bandpass(&cal.x, fs, c, w)?,
            cal_y: bandpass(&cal.y, fs, c, w)?,
            config: config.clone(),
        })
    }

    fn channel_series(&self, spec: &ChannelSpec) -> (Vec<f64>, Vec<f64>) {
        let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(&xv, &yv)| spec.ca * xv + spec.cb * yv).collect()
        };
        (mix(&self.x, &self.y), mix(&self.cal_x, &self.cal_y))
    }

    /// Whole-record variance estimate for a fixed-phase acquisition.
    pub fn fixed_variance(&self, spec: &ChannelSpec) -> Result<f64> {
        let (sig, cal) = self.channel_series(spec);
        estimate_variance(&sig, &cal)
    }

    /// Sample cross-covariance of the filtered x and y channels, normalized
    /// by the calibration variances.
    pub fn cross_covariance(&self) -> Result<f64> {
        let n = self.x.len() as f64;
        let mx = self.x.iter().sum::<f64>() / n;
        let my = self.y.iter().sum::<f64>() / n;
        let cov = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(&a, &b)| (a - mx) * (b - my))
            .sum::<f64>()
            / n;
        let vx = sample_variance(&self.cal_x);
        let vy = sample_variance(&self.cal_y);
        if vx == 0.0 || vy == 0.0 {
            return Err(Error::CalibrationError("degenerate calibration".into()));
        }
        Ok(cov / (vx * vy).sqrt())
    }

    /// Windowed variance estimates over a phase scan. Each segment is tagged
    /// with the phase at its midpoint minus the channel's measurement offset,
    /// wrapped into the scanned turn, and points are sorted by phase.
    pub fn windowed_trace(&self, spec: &ChannelSpec) -> Result<VarianceTrace> {
        let start = self.config.scan_start().ok_or_else(|| {
            Error::InvalidConfig("windowed traces need a phase-scan acquisition".into())
        })?;
        let n = self.x.len();
        let seg = (self.config.segment_s * self.config.sample_rate_hz).round() as usize;
        if seg == 0 || n / seg < 2 {
            return Err(Error::InvalidConfig("record too short for the segment length".into()));
        }
        let (sig, cal) = self.channel_series(spec);
        let cal_var = sample_variance(&cal);
        if cal_var == 0.0 {
            return Err(Error::CalibrationError("degenerate calibration".into()));
        }
        let mut points: Vec<(f64, f64)> = (0..n / seg)
            .map(|k| {
                let mid = (k * seg + seg / 2) as f64;
                let phi_measured = start + TAU * mid / n as f64;
                let phi = start + (phi_measured - spec.phase_offset - start).rem_euclid(TAU);
                let var = sample_variance(&sig[k * seg..(k + 1) * seg]) / cal_var;
                (phi, var)
            })
            .collect();
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(VarianceTrace {
            channel: spec.name.clone(),
            phi_rad: points.iter().map(|p| p.0).collect(),
            variance_snu: points.iter().map(|p| p.1).collect(),
        })
    }
}

/// Monte Carlo and analytic traces of one channel over a phase scan.
pub struct ScanTrace {
    pub monte_carlo: VarianceTrace,
    pub analytic: VarianceTrace,
}

/// Convenience wrapper: simulate, filter, window, and overlay the analytic
/// trace of the same detected state on the Monte Carlo grid.
pub fn scan_trace(
    state: &GaussianState,
    eff: &DetectorEfficiencies,
    config: &MeasurementConfig,
    spec: &ChannelSpec,
) -> Result<ScanTrace> {
    let record = simulate_photocurrents(state, eff, config)?;
    let filtered = FilteredRecord::new(&record, config)?;
    let monte_carlo = filtered.windowed_trace(spec)?;
    let detected = detected_state(state, eff)?;
    let analytic = analytic_trace(&detected, spec, &monte_carlo.phi_rad, config.electronic_noise)?;
    Ok(ScanTrace { monte_carlo, analytic })
}
