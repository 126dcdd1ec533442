//! The committed calibration data must be re-derivable from the documented
//! solver procedure, and the calibrated scenarios must reproduce both
//! measured anchors.

use std::f64::consts::PI;

use hgbeam::detection::{detected_state, MODE_X, MODE_Y};
use hgbeam::gaussian::db_to_variance;
use hgbeam::metrics::{correct_electronic_noise, inseparability_analytic};
use hgbeam::scenario::{self, calibrate, ChainElement};

const DETECTED_SQUEEZING_DB: f64 = -1.7;
const TARGET_I: f64 = 0.81;
const SOURCE_SQUEEZING_DB: f64 = -4.0;

fn committed() -> (f64, f64, f64) {
    let cfg = scenario::bundled("paper_calibrated").unwrap();
    let eta = cfg
        .chain
        .iter()
        .find_map(|el| match el {
            ChainElement::Loss { eta } => Some(*eta),
            _ => None,
        })
        .expect("calibrated chain carries a loss element");
    (
        eta,
        cfg.source.antisqueezing_db[0],
        cfg.source.relative_phase_rad,
    )
}

#[test]
fn committed_loss_matches_the_solver() {
    let (eta_p, _, _) = committed();
    let eta_tot =
        calibrate::chain_efficiency_for_detected_squeezing(SOURCE_SQUEEZING_DB, DETECTED_SQUEEZING_DB)
            .unwrap();
    let expected = eta_tot / (2.0 / PI);
    assert!(
        (eta_p - expected).abs() < 1e-9,
        "committed eta_p = {eta_p}, solver gives {expected}"
    );
}

#[test]
fn committed_antisqueezing_matches_the_solver() {
    let (eta_p, antisq, offset) = committed();
    assert!((offset - PI / 7.0).abs() < 1e-12);
    let solved =
        calibrate::solve_antisqueezing_db(TARGET_I, SOURCE_SQUEEZING_DB, offset, eta_p * 2.0 / PI)
            .unwrap();
    assert!(
        (antisq - solved).abs() < 1e-6,
        "committed antisqueezing = {antisq} dB, solver gives {solved} dB"
    );
}

#[test]
fn calibrated_scenarios_share_the_source_and_loss() {
    let reference = committed();
    for name in ["fig3a", "fig3b", "fig3c", "fig3d"] {
        let cfg = scenario::bundled(name).unwrap();
        assert_eq!(cfg.source.squeezing_db, [SOURCE_SQUEEZING_DB; 2], "{name}");
        assert!((cfg.source.antisqueezing_db[0] - reference.1).abs() < 1e-12, "{name}");
        assert!((cfg.source.relative_phase_rad - reference.2).abs() < 1e-12, "{name}");
        let eta = cfg.chain.iter().find_map(|el| match el {
            ChainElement::Loss { eta } => Some(*eta),
            _ => None,
        });
        assert_eq!(eta, Some(reference.0), "{name}");
    }
}

#[test]
fn bare_source_scenario_detects_minus_1_7_db() {
    let cfg = scenario::bundled("fig3a").unwrap();
    let (state, eff) = scenario::build_state(&cfg).unwrap();
    let detected = detected_state(&state, &eff).unwrap();
    let v_el = cfg.measurement.electronic_noise;
    for coeffs in [[1.0, 0.0], [0.0, 1.0]] {
        let raw_min = (0..4096)
            .map(|k| {
                let phi = PI * k as f64 / 4096.0;
                let v = detected.quadrature_variance(&coeffs, phi).unwrap();
                v * (1.0 - v_el) + v_el
            })
            .fold(f64::INFINITY, f64::min);
        let corrected = correct_electronic_noise(raw_min, v_el, 1.0).unwrap();
        assert!(
            (corrected - db_to_variance(DETECTED_SQUEEZING_DB)).abs() < 1e-6,
            "detected minimum {corrected} vs {}",
            db_to_variance(DETECTED_SQUEEZING_DB)
        );
    }
}

#[test]
fn calibrated_scenario_reaches_the_target_inseparability() {
    let cfg = scenario::bundled("paper_calibrated").unwrap();
    let (state, eff) = scenario::build_state(&cfg).unwrap();
    let detected = detected_state(&state, &eff).unwrap();
    let res =
        inseparability_analytic(&detected, MODE_X, MODE_Y, cfg.measurement.electronic_noise)
            .unwrap();
    assert!(
        (res.i_corrected - TARGET_I).abs() < 1e-6,
        "I_corrected = {}",
        res.i_corrected
    );
    assert!(res.i_raw > res.i_corrected);
}
