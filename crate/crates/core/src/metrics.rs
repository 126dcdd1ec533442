//! Inseparability criterion `I = sqrt(V_sum(phi0) * V_diff(phi0 + pi/2))`
//! minimized over the LO phase, from Gaussian states directly or from
//! measured variance traces, with electronic-noise correction. `I < 1`
//! certifies entanglement of the two modes.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::detection::VarianceTrace;
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// Number of coarse grid points over `[0, pi)` for the analytic minimization.
const GRID_POINTS: usize = 1024;

/// Outcome of an inseparability evaluation. The stored variances are the raw
/// measured values (electronic noise included), so `i_raw` is exactly
/// `sqrt(v_sum * v_diff)`; `i_corrected` applies the shot-noise-renormalized
/// electronic-noise correction to each variance first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InseparabilityResult {
    pub phi0: f64,
    pub v_sum: f64,
    pub v_diff: f64,
    pub i_raw: f64,
    pub i_corrected: f64,
    /// Electronic noise fraction used for the correction.
    pub electronic_noise: f64,
    /// Statistical uncertainty on `i_raw` when the minimum came from a noisy
    /// grid without sub-grid refinement.
    pub uncertainty: Option<f64>,
    /// Whether the minimizer was refined below the grid spacing.
    pub refined: bool,
}

impl InseparabilityResult {
    fn assemble(
        phi0: f64,
        v_sum: f64,
        v_diff: f64,
        electronic_noise: f64,
        uncertainty: Option<f64>,
        refined: bool,
    ) -> Result<Self> {
        let i_raw = (v_sum * v_diff).sqrt();
        let i_corrected = if electronic_noise > 0.0 {
            let cs = correct_electronic_noise(v_sum, electronic_noise, 1.0)?;
            let cd = correct_electronic_noise(v_diff, electronic_noise, 1.0)?;
            (cs * cd).sqrt()
        } else {
            i_raw
        };
        Ok(InseparabilityResult {
            phi0,
            v_sum,
            v_diff,
            i_raw,
            i_corrected,
            electronic_noise,
            uncertainty,
            refined,
        })
    }

    /// CSV export: `phi0_rad,V_sum,V_diff,I_raw,I_corrected,V_el`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi0_rad,V_sum,V_diff,I_raw,I_corrected,V_el")?;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            self.phi0, self.v_sum, self.v_diff, self.i_raw, self.i_corrected,
            self.electronic_noise
        )?;
        Ok(())
    }
}

/// Remove additive electronic noise from a measured variance, renormalized so
/// a vacuum measurement corrects to exactly `v_shot`:
/// `V_corr = (V_meas - V_el) / (V_shot - V_el) * V_shot`, with `V_shot = 1`
/// in shot-noise units.
pub fn correct_electronic_noise(v_meas: f64, v_el: f64, v_shot: f64) -> Result<f64> {
    if !(v_el >= 0.0) || !(v_el < v_shot) {
        return Err(Error::InvalidParameter(format!(
            "electronic noise must satisfy 0 <= V_el < V_shot, got V_el = {v_el}, \
             V_shot = {v_shot}"
        )));
    }
    if v_meas <= v_el {
        return Err(Error::NoiseFloorError(format!(
            "measured variance {v_meas} does not exceed the electronic noise {v_el}"
        )));
    }
    Ok((v_meas - v_el) / (v_shot - v_el) * v_shot)
}

/// Raw sum/diff product folded with the electronic-noise fraction, as the
/// detector would report it.
fn raw_pair(state: &GaussianState, mode_a: &str, mode_b: &str, phi: f64, v_el: f64) -> Result<(f64, f64)> {
    let (vs, vd) = state.sum_diff_variances(mode_a, mode_b, phi)?;
    Ok((vs * (1.0 - v_el) + v_el, vd * (1.0 - v_el) + v_el))
}

/// Minimize `I(phi)` for a Gaussian state over a dense grid on `[0, pi)` with
/// local parabolic refinement (the product is pi-periodic in the LO phase).
pub fn inseparability_analytic(
    state: &GaussianState,
    mode_a: &str,
    mode_b: &str,
    electronic_noise: f64,
) -> Result<InseparabilityResult> {
    if !(0.0..1.0).contains(&electronic_noise) {
        return Err(Error::InvalidParameter(format!(
            "electronic noise fraction must lie in [0, 1), got {electronic_noise}"
        )));
    }
    let product = |phi: f64| -> Result<f64> {
        let (vs, vd) = raw_pair(state, mode_a, mode_b, phi, electronic_noise)?;
        Ok(vs * vd)
    };
    let step = PI / GRID_POINTS as f64;
    let mut best = (0.0, product(0.0)?);
    for k in 1..GRID_POINTS {
        let phi = k as f64 * step;
        let val = product(phi)?;
        // relative tie-breaking keeps the first grid minimizer on flat traces
        if val < best.1 * (1.0 - 1e-12) {
            best = (phi, val);
        }
    }
    let phi0 = refine_parabolic(&|phi| product(phi).unwrap_or(f64::INFINITY), best.0, step);
    let (v_sum, v_diff) = raw_pair(state, mode_a, mode_b, phi0, electronic_noise)?;
    InseparabilityResult::assemble(phi0, v_sum, v_diff, electronic_noise, None, true)
}

/// Successive parabolic steps with a shrinking probe; falls back to pure
/// shrinking when the local curvature closes. Converges well below 1e-9 rad
/// for smooth traces.
fn refine_parabolic(f: &dyn Fn(f64) -> f64, mut x: f64, mut h: f64) -> f64 {
    let mut fx = f(x);
    for _ in 0..80 {
        if h < 1e-13 {
            break;
        }
        let (fl, fr) = (f(x - h), f(x + h));
        let d2 = fl - 2.0 * fx + fr;
        // curvature below float noise means the product is locally flat;
        // stay on the grid point
        if d2 > 1e-12 * fx.abs().max(1e-300) {
            let delta = (0.5 * (fl - fr) / d2 * h).clamp(-h, h);
            let xn = x + delta;
            let fn_ = f(xn);
            if fn_ < fx {
                x = xn;
                fx = fn_;
            }
        }
        h *= 0.5;
    }
    x
}

/// Inseparability from measured traces. The sum trace is sampled at the
/// reported phase grid and the diff trace must already carry its pi/2
/// measurement offset (as `detection` produces them), so the product is
/// formed pointwise.
///
/// Refinement below the grid is attempted only where the local curvature of
/// the product rises above the trace noise floor; otherwise the grid minimum
/// is returned together with an uncertainty estimate.
pub fn inseparability_from_traces(
    sum: &VarianceTrace,
    diff: &VarianceTrace,
    electronic_noise: f64,
) -> Result<InseparabilityResult> {
    if sum.phi_rad.len() != diff.phi_rad.len() || sum.phi_rad.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "trace grids differ in size ({} vs {}) or are too short",
            sum.phi_rad.len(),
            diff.phi_rad.len()
        )));
    }
    for (a, b) in sum.phi_rad.iter().zip(&diff.phi_rad) {
        if (a - b).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "trace phase grids disagree at {a} vs {b}"
            )));
        }
    }
    let n = sum.phi_rad.len();
    let span = sum.phi_rad[n - 1] - sum.phi_rad[0];
    let step = span / (n - 1) as f64;
    if span + step < PI - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "trace covers only {span:.3} rad; need at least pi"
        )));
    }
    // the product is pi-periodic: wrap neighbor lookups when the grid closes
    // a full period (or a full turn)
    let periodic = (span + step - PI).abs() < 0.5 * step
        || (span + step - 2.0 * PI).abs() < 0.5 * step;

    let product: Vec<f64> = sum
        .variance_snu
        .iter()
        .zip(&diff.variance_snu)
        .map(|(&a, &b)| a * b)
        .collect();
    let k_min = product
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap();

    // noise floor of the product from its third differences, which vanish on
    // smooth traces but carry 20 sigma^2 of point noise
    let d3s: Vec<f64> = (0..n - 3)
        .map(|k| product[k + 3] - 3.0 * product[k + 2] + 3.0 * product[k + 1] - product[k])
        .collect();
    let sigma_p =
        (d3s.iter().map(|d| d * d).sum::<f64>() / d3s.len() as f64).sqrt() / 20.0f64.sqrt();

    let neighbor = |k: isize| -> Option<usize> {
        if (0..n as isize).contains(&k) {
            Some(k as usize)
        } else if periodic {
            Some(k.rem_euclid(n as isize) as usize)
        } else {
            None
        }
    };
    let (kl, kr) = (neighbor(k_min as isize - 1), neighbor(k_min as isize + 1));

    if let (Some(kl), Some(kr)) = (kl, kr) {
        let (pl, pc, pr) = (product[kl], product[k_min], product[kr]);
        let d2 = pl - 2.0 * pc + pr;
        // refinement is meaningful only when the curvature stands clear of
        // the noise in a single second difference (sqrt(6) sigma)
        if d2 > 3.0 * 6.0f64.sqrt() * sigma_p {
            let delta = (0.5 * (pl - pr) / d2).clamp(-1.0, 1.0);
            let phi0 = sum.phi_rad[k_min] + delta * step;
            let interp = |vals: &[f64]| -> f64 {
                let (l, c, r) = (vals[kl], vals[k_min], vals[kr]);
                c + 0.5 * (r - l) * delta + 0.5 * (l - 2.0 * c + r) * delta * delta
            };
            let v_sum = interp(&sum.variance_snu);
            let v_diff = interp(&diff.variance_snu);
            return InseparabilityResult::assemble(
                phi0,
                v_sum,
                v_diff,
                electronic_noise,
                None,
                true,
            );
        }
    }
    let i_grid = product[k_min].sqrt();
    let uncertainty = if i_grid > 0.0 { Some(sigma_p / (2.0 * i_grid)) } else { None };
    InseparabilityResult::assemble(
        sum.phi_rad[k_min],
        sum.variance_snu[k_min],
        diff.variance_snu[k_min],
        electronic_noise,
        uncertainty,
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{db_to_variance, GaussianState, ModeLabel, SqueezerSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn two_mode_vacuum() -> GaussianState {
        GaussianState::vacuum(vec![ModeLabel::hg(1, 0), ModeLabel::hg(0, 1)]).unwrap()
    }

    fn ideal_chain(squeezing_db: f64, offset: f64) -> GaussianState {
        two_mode_vacuum()
            .apply_squeezed_thermal("HG10", &SqueezerSpec::pure(squeezing_db, 0.0))
            .unwrap()
            .apply_squeezed_thermal("HG01", &SqueezerSpec::pure(squeezing_db, offset))
            .unwrap()
            .apply_phase("HG01", FRAC_PI_2)
            .unwrap()
            .apply_basis_rotation("HG10", "HG01", FRAC_PI_4)
            .unwrap()
    }

    #[test]
    fn correction_identities() {
        assert_eq!(correct_electronic_noise(0.5, 0.0, 1.0).unwrap(), 0.5);
        // vacuum fixed point
        for v_el in [0.01, 0.05, 0.3] {
            assert_relative_eq!(
                correct_electronic_noise(1.0, v_el, 1.0).unwrap(),
                1.0,
                epsilon = 1e-15
            );
        }
        assert_relative_eq!(
            correct_electronic_noise(0.70, 0.05, 1.0).unwrap(),
            0.6842105263157894,
            epsilon = 1e-12
        );
    }

    #[test]
    fn correction_is_monotone_and_pins_the_floor() {
        let mut prev = 0.0;
        for k in 1..20 {
            let v = 0.05 + k as f64 * 0.1;
            let c = correct_electronic_noise(v, 0.05, 1.0).unwrap();
            assert!(c > prev);
            prev = c;
        }
        // the floor itself corrects toward zero
        let near_floor = correct_electronic_noise(0.05 + 1e-12, 0.05, 1.0).unwrap();
        assert!(near_floor < 1e-9);
    }

    #[test]
    fn correction_errors() {
        assert!(matches!(
            correct_electronic_noise(0.04, 0.05, 1.0),
            Err(Error::NoiseFloorError(_))
        ));
        assert!(matches!(
            correct_electronic_noise(0.5, 1.2, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn vacuum_is_exactly_separable() {
        let res = inseparability_analytic(&two_mode_vacuum(), "HG10", "HG01", 0.0).unwrap();
        assert_relative_eq!(res.i_raw, 1.0, epsilon = 1e-12);
        // flat product: the first grid minimizer is reported
        assert_eq!(res.phi0, 0.0);
    }

    #[test]
    fn ideal_chain_reaches_the_squeezing_level() {
        let res = inseparability_analytic(&ideal_chain(-4.0, 0.0), "HG10", "HG01", 0.0).unwrap();
        assert_relative_eq!(res.i_raw, db_to_variance(-4.0), epsilon = 1e-9);
        assert_relative_eq!(res.i_corrected, res.i_raw, epsilon = 1e-15);
        assert_relative_eq!(res.v_sum, db_to_variance(-4.0), epsilon = 1e-9);
        assert_relative_eq!(res.v_diff, db_to_variance(-4.0), epsilon = 1e-9);
        assert!(res.refined);
    }

    #[test]
    fn inseparability_decreases_with_squeezing_strength() {
        let mut prev = 1.0;
        for db in [-1.0, -2.0, -3.0, -4.5, -6.0] {
            let res = inseparability_analytic(&ideal_chain(db, 0.0), "HG10", "HG01", 0.0).unwrap();
            assert!(res.i_raw < 1.0);
            assert!(res.i_raw < prev - 1e-6, "I({db}) = {}", res.i_raw);
            prev = res.i_raw;
        }
    }

    #[test]
    fn separable_product_states_stay_above_one() {
        // squeezed but unmixed modes: no entanglement, I >= 1
        let st = two_mode_vacuum()
            .apply_squeezed_thermal("HG10", &SqueezerSpec::new(-4.0, 6.5, 0.3))
            .unwrap()
            .apply_squeezed_thermal("HG01", &SqueezerSpec::new(-2.0, 3.0, 1.1))
            .unwrap()
            .apply_loss("HG10", 0.7)
            .unwrap();
        let res = inseparability_analytic(&st, "HG10", "HG01", 0.0).unwrap();
        assert!(res.i_raw >= 1.0 - 1e-9, "I = {}", res.i_raw);
    }

    #[test]
    fn stored_components_reproduce_i_exactly() {
        let res = inseparability_analytic(&ideal_chain(-3.0, 0.1), "HG10", "HG01", 0.05).unwrap();
        assert_eq!(res.i_raw, (res.v_sum * res.v_diff).sqrt());
        assert!(res.i_corrected <= res.i_raw);
    }

    #[test]
    fn refinement_finds_off_grid_minimizers() {
        // single squeezer at an off-grid ellipse angle: the product
        // (A+1)^2 - B^2 cos^2(2(phi - angle)) has exact minimizers at
        // angle mod pi/2
        let angle = 0.3;
        let st = two_mode_vacuum()
            .apply_squeezed_thermal("HG10", &SqueezerSpec::pure(-4.0, angle))
            .unwrap();
        let res = inseparability_analytic(&st, "HG10", "HG01", 0.0).unwrap();
        let err = [angle, angle + FRAC_PI_2]
            .iter()
            .map(|c| (res.phi0 - c).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(err < 1e-6, "phi0 = {}, err = {err}", res.phi0);
    }

    #[test]
    fn flat_traces_give_unity() {
        let n = 256;
        let phis: Vec<f64> = (0..n).map(|k| PI * k as f64 / n as f64).collect();
        let flat = VarianceTrace {
            channel: "sum".into(),
            phi_rad: phis.clone(),
            variance_snu: vec![1.0; n],
        };
        let flat_d = VarianceTrace { channel: "diff".into(), ..flat.clone() };
        let res = inseparability_from_traces(&flat, &flat_d, 0.0).unwrap();
        assert_relative_eq!(res.i_raw, 1.0, epsilon = 1e-12);
        assert!(!res.refined);
        assert!(res.uncertainty.is_some());
    }

    #[test]
    fn aligned_trace_minima_multiply() {
        // sum and diff dipping to 0.676 at the same phase: I = 0.676
        let n = 512;
        let v = db_to_variance(-1.7);
        let dip = PI * 130.0 / n as f64;
        let phis: Vec<f64> = (0..n).map(|k| PI * k as f64 / n as f64).collect();
        let shape = |phi: f64| v + (1.4 - v) * (2.0 * (phi - dip)).sin().powi(2);
        let sum = VarianceTrace {
            channel: "sum".into(),
            phi_rad: phis.clone(),
            variance_snu: phis.iter().map(|&p| shape(p)).collect(),
        };
        let diff = VarianceTrace {
            channel: "diff".into(),
            phi_rad: phis.clone(),
            variance_snu: phis.iter().map(|&p| shape(p)).collect(),
        };
        let res = inseparability_from_traces(&sum, &diff, 0.0).unwrap();
        assert_relative_eq!(res.i_raw, v, epsilon = 1e-9);
        assert!((res.phi0 - dip).abs() < 1e-9);
        assert!(res.refined);
    }

    #[test]
    fn trace_grid_mismatch_is_rejected() {
        let a = VarianceTrace {
            channel: "sum".into(),
            phi_rad: (0..64).map(|k| k as f64 * 0.05).collect(),
            variance_snu: vec![1.0; 64],
        };
        let mut b = a.clone();
        b.phi_rad[10] += 0.01;
        assert!(matches!(
            inseparability_from_traces(&a, &b, 0.0),
            Err(Error::InvalidInput(_))
        ));
        let short = VarianceTrace {
            channel: "diff".into(),
            phi_rad: (0..32).map(|k| k as f64 * 0.05).collect(),
            variance_snu: vec![1.0; 32],
        };
        assert!(matches!(
            inseparability_from_traces(&a, &short, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn narrow_trace_coverage_is_rejected() {
        let n = 64;
        let phis: Vec<f64> = (0..n).map(|k| k as f64 * 0.01).collect();
        let t = VarianceTrace { channel: "sum".into(), phi_rad: phis, variance_snu: vec![1.0; n] };
        assert!(matches!(
            inseparability_from_traces(&t, &t.clone(), 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn noisy_flat_traces_refuse_refinement() {
        // deterministic pseudo-noise on a flat trace: curvature never clears
        // the noise floor, so the grid minimum and an uncertainty come back
        let n = 512;
        let phis: Vec<f64> = (0..n).map(|k| PI * k as f64 / n as f64).collect();
        let noisy = |salt: u64| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let h = (k as u64).wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(salt);
                    1.0 + 0.02 * (((h >> 11) as f64 / (1u64 << 53) as f64) - 0.5)
                })
                .collect()
        };
        let sum = VarianceTrace { channel: "sum".into(), phi_rad: phis.clone(), variance_snu: noisy(1) };
        let diff = VarianceTrace { channel: "diff".into(), phi_rad: phis, variance_snu: noisy(2) };
        let res = inseparability_from_traces(&sum, &diff, 0.0).unwrap();
        assert!(!res.refined);
        let sigma = res.uncertainty.unwrap();
        assert!(sigma > 1e-4 && sigma < 0.1, "sigma = {sigma}");
    }

    #[test]
    fn csv_row_schema() {
        let res = inseparability_analytic(&ideal_chain(-4.0, 0.0), "HG10", "HG01", 0.05).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "phi0_rad,V_sum,V_diff,I_raw,I_corrected,V_el");
        assert_eq!(lines.next().unwrap().split(',').count(), 6);
    }
}
