//! One-time calibration of the quadrant-detection chain against its two
//! measured anchors: the detected squeezing level of the individual modes and
//! the corrected inseparability of the entangled pair. The solved values are
//! committed as scenario data; the solvers stay here so the committed numbers
//! can be re-derived and checked.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::detection::{MODE_X, MODE_Y};
use crate::error::{Error, Result};
use crate::gaussian::{db_to_variance, GaussianState, ModeLabel, SqueezerSpec};
use crate::metrics::inseparability_analytic;

/// Total chain transmittance that degrades a squeezed quadrature from
/// `source_db` to `detected_db`: `eta = (1 - V_det) / (1 - V_src)`.
pub fn chain_efficiency_for_detected_squeezing(source_db: f64, detected_db: f64) -> Result<f64> {
    let (vs, vd) = (db_to_variance(source_db), db_to_variance(detected_db));
    if !(vs < 1.0) || !(vd < 1.0) || vd < vs {
        return Err(Error::CalibrationError(format!(
            "need source squeezing below detection level below shot noise, \
             got {source_db} dB -> {detected_db} dB"
        )));
    }
    Ok((1.0 - vd) / (1.0 - vs))
}

/// Entangling chain used by the calibrated scenarios: two squeezed-thermal
/// sources with a relative ellipse rotation, the quarter-wave Gouy shift, the
/// 45-degree basis rotation, and the total chain loss on both modes.
pub fn calibrated_chain(
    squeezing_db: f64,
    antisqueezing_db: f64,
    phase_offset: f64,
    eta_total: f64,
) -> Result<GaussianState> {
    GaussianState::vacuum(vec![ModeLabel::hg(1, 0), ModeLabel::hg(0, 1)])?
        .apply_squeezed_thermal(
            MODE_X,
            &SqueezerSpec::new(squeezing_db, antisqueezing_db, 0.0),
        )?
        .apply_squeezed_thermal(
            MODE_Y,
            &SqueezerSpec::new(squeezing_db, antisqueezing_db, phase_offset),
        )?
        .apply_phase(MODE_X, FRAC_PI_2)?
        .apply_basis_rotation(MODE_X, MODE_Y, FRAC_PI_4)?
        .apply_loss(MODE_X, eta_total)?
        .apply_loss(MODE_Y, eta_total)
}

fn chain_inseparability(
    squeezing_db: f64,
    antisqueezing_db: f64,
    phase_offset: f64,
    eta_total: f64,
) -> Result<f64> {
    let state = calibrated_chain(squeezing_db, antisqueezing_db, phase_offset, eta_total)?;
    Ok(inseparability_analytic(&state, MODE_X, MODE_Y, 0.0)?.i_corrected)
}

/// Solve for the source antisqueezing (the free thermal excess) that makes
/// the corrected inseparability of the calibrated chain hit `target_i`.
/// Monotone in the antisqueezing level, so a bisection suffices.
pub fn solve_antisqueezing_db(
    target_i: f64,
    squeezing_db: f64,
    phase_offset: f64,
    eta_total: f64,
) -> Result<f64> {
    let mut lo = -squeezing_db; // pure squeezer, least excess
    let mut hi = 20.0;
    let f = |a: f64| chain_inseparability(squeezing_db, a, phase_offset, eta_total);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo <= target_i && target_i <= fhi) {
        return Err(Error::CalibrationError(format!(
            "target I = {target_i} outside the reachable range [{flo:.4}, {fhi:.4}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target_i {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn efficiency_reproduces_the_detected_level() {
        let eta = chain_efficiency_for_detected_squeezing(-4.0, -1.7).unwrap();
        let detected = eta * db_to_variance(-4.0) + (1.0 - eta);
        assert_relative_eq!(detected, db_to_variance(-1.7), epsilon = 1e-12);
        assert!(chain_efficiency_for_detected_squeezing(-1.7, -4.0).is_err());
    }

    #[test]
    fn antisqueezing_solver_hits_the_target() {
        let eta = chain_efficiency_for_detected_squeezing(-4.0, -1.7).unwrap();
        let a = solve_antisqueezing_db(0.81, -4.0, PI / 7.0, eta).unwrap();
        let i = chain_inseparability(-4.0, a, PI / 7.0, eta).unwrap();
        assert_relative_eq!(i, 0.81, epsilon = 1e-9);
        // the solved excess sits above the pure-squeezer level
        assert!(a > 4.0);
    }

    #[test]
    fn unreachable_targets_are_reported() {
        let eta = chain_efficiency_for_detected_squeezing(-4.0, -1.7).unwrap();
        assert!(matches!(
            solve_antisqueezing_db(0.1, -4.0, PI / 7.0, eta),
            Err(Error::CalibrationError(_))
        ));
    }
}
