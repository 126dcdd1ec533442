//! Gain masks over the detector plane and mode overlap integrals against
//! them: half-plane splits, the four-pixel quadrant layout, and the
//! per-channel detection efficiencies of the flipped-mode measurement.

use super::{quad, HgMode};
use crate::error::{Error, Result};

/// Absolute tolerance of every overlap integral.
pub const OVERLAP_TOL: f64 = 1e-9;

/// Integration window half-width, in beam radii.
const WINDOW_RADII: f64 = 6.0;

/// One rectangular region of a gain mask, in the mask frame. Bounds may be
/// infinite; they are clipped to the integration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub gain: f64,
}

impl MaskRegion {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, gain: f64) -> Self {
        MaskRegion { x_min, x_max, y_min, y_max, gain }
    }

    fn clip(&self, window: [f64; 4]) -> [f64; 4] {
        [
            self.x_min.max(window[0]),
            self.x_max.min(window[1]),
            self.y_min.max(window[2]),
            self.y_max.min(window[3]),
        ]
    }
}

/// Piecewise-constant gain over the transverse plane. The regions must tile
/// the plane; the whole mask may be rotated and displaced relative to the
/// beam axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMask {
    pub regions: Vec<MaskRegion>,
    /// Rotation of the mask about the beam axis, radians.
    pub rotation: f64,
    /// Displacement of the mask center from the beam axis, in length units.
    pub offset: (f64, f64),
    pub description: String,
}

const INF: f64 = f64::INFINITY;

impl GainMask {
    /// Unit gain over the whole plane.
    pub fn uniform() -> Self {
        GainMask {
            regions: vec![MaskRegion::new(-INF, INF, -INF, INF, 1.0)],
            rotation: 0.0,
            offset: (0.0, 0.0),
            description: "uniform".into(),
        }
    }

    /// Two half-planes split along x = 0 with the given gains.
    pub fn split_x(gain_pos: f64, gain_neg: f64) -> Self {
        GainMask {
            regions: vec![
                MaskRegion::new(0.0, INF, -INF, INF, gain_pos),
                MaskRegion::new(-INF, 0.0, -INF, INF, gain_neg),
            ],
            rotation: 0.0,
            offset: (0.0, 0.0),
            description: "x-split".into(),
        }
    }

    /// Two half-planes split along y = 0 with the given gains.
    pub fn split_y(gain_pos: f64, gain_neg: f64) -> Self {
        GainMask {
            regions: vec![
                MaskRegion::new(-INF, INF, 0.0, INF, gain_pos),
                MaskRegion::new(-INF, INF, -INF, 0.0, gain_neg),
            ],
            rotation: 0.0,
            offset: (0.0, 0.0),
            description: "y-split".into(),
        }
    }

    /// Four quadrant pixels with per-pixel gains, labeled
    /// A = (+x, +y), B = (+x, -y), C = (-x, +y), D = (-x, -y), so that the
    /// combination (A+B)-(C+D) flips along x and (A+C)-(B+D) flips along y.
    pub fn quadrants(gains: [f64; 4]) -> Self {
        let [a, b, c, d] = gains;
        GainMask {
            regions: vec![
                MaskRegion::new(0.0, INF, 0.0, INF, a),
                MaskRegion::new(0.0, INF, -INF, 0.0, b),
                MaskRegion::new(-INF, 0.0, 0.0, INF, c),
                MaskRegion::new(-INF, 0.0, -INF, 0.0, d),
            ],
            rotation: 0.0,
            offset: (0.0, 0.0),
            description: "quadrants".into(),
        }
    }

    pub fn rotated(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn with_offset(mut self, offset: (f64, f64)) -> Self {
        self.offset = offset;
        self
    }

    /// Check that the regions tile the given window: pairwise disjoint and
    /// covering its full area.
    fn validate_on(&self, window: [f64; 4]) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::InvalidMask("mask has no regions".into()));
        }
        let area = |r: [f64; 4]| ((r[1] - r[0]).max(0.0)) * ((r[3] - r[2]).max(0.0));
        let mut covered = 0.0;
        for (i, a) in self.regions.iter().enumerate() {
            let ra = a.clip(window);
            covered += area(ra);
            for b in self.regions.iter().skip(i + 1) {
                let rb = b.clip(window);
                let overlap = [
                    ra[0].max(rb[0]),
                    ra[1].min(rb[1]),
                    ra[2].max(rb[2]),
                    ra[3].min(rb[3]),
                ];
                if area(overlap) > 1e-12 * area(window).max(1.0) {
                    return Err(Error::InvalidMask(format!(
                        "regions {i} and later overlap in `{}`",
                        self.description
                    )));
                }
            }
        }
        let total = area(window);
        if (covered - total).abs() > 1e-9 * total.max(1.0) {
            return Err(Error::InvalidMask(format!(
                "regions cover {covered:.6e} of a {total:.6e} window in `{}`",
                self.description
            )));
        }
        Ok(())
    }
}

/// Overlap integral of two modes weighted by a gain mask:
/// `int u_a(x, y) g(x, y) u_b(x, y) dx dy`, region-wise so the integrand
/// stays smooth inside every quadrature cell.
pub fn masked_overlap(mode_a: &HgMode, mode_b: &HgMode, mask: &GainMask) -> Result<f64> {
    if (mode_a.waist - mode_b.waist).abs() > 1e-12 * mode_a.waist {
        return Err(Error::InvalidParameter(format!(
            "overlaps are defined at a common waist, got {} and {}",
            mode_a.waist, mode_b.waist
        )));
    }
    let half = WINDOW_RADII * mode_a.waist;
    // beam center in the mask frame: p = R(-rot) (lab - offset) at lab = 0
    let (c, s) = (mask.rotation.cos(), mask.rotation.sin());
    let bx = -(c * mask.offset.0 + s * mask.offset.1);
    let by = -(-s * mask.offset.0 + c * mask.offset.1);
    let window = [bx - half, bx + half, by - half, by + half];
    mask.validate_on(window)?;

    let tol = OVERLAP_TOL / mask.regions.len() as f64;
    let mut total = 0.0;
    for region in &mask.regions {
        let rect = region.clip(window);
        if rect[1] <= rect[0] || rect[3] <= rect[2] {
            continue;
        }
        let val = quad::integrate_rect(rect, tol, &|x, y| {
            // mask frame -> lab frame
            let lx = c * x - s * y + mask.offset.0;
            let ly = s * x + c * y + mask.offset.1;
            mode_a.amplitude(lx, ly) * mode_b.amplitude(lx, ly)
        })?;
        total += region.gain * val;
    }
    Ok(total)
}

/// Quadrant-detector geometry: pixel boundaries may be rotated about and
/// displaced from the beam axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadrantGeometry {
    pub rotation: f64,
    pub offset: (f64, f64),
}

impl QuadrantGeometry {
    pub fn centered() -> Self {
        Self::default()
    }

    /// Gain mask of the x channel, (A+B)-(C+D).
    pub fn x_flip_mask(&self) -> GainMask {
        GainMask::quadrants([1.0, 1.0, -1.0, -1.0])
            .rotated(self.rotation)
            .with_offset(self.offset)
    }

    /// Gain mask of the y channel, (A+C)-(B+D).
    pub fn y_flip_mask(&self) -> GainMask {
        GainMask::quadrants([1.0, -1.0, 1.0, -1.0])
            .rotated(self.rotation)
            .with_offset(self.offset)
    }
}

/// Homodyne efficiencies of the split-detection channels.
///
/// The flipped LO mode (TEM00 times the sign mask) overlaps the first-order
/// signal mode with amplitude `sqrt(2/pi)`; the remainder couples to vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorEfficiencies {
    pub eta_x: f64,
    pub eta_y: f64,
}

impl DetectorEfficiencies {
    pub fn ideal() -> Self {
        DetectorEfficiencies { eta_x: 1.0, eta_y: 1.0 }
    }

    /// Fraction of the flipped mode coupling to modes outside the measured
    /// one, treated as vacuum.
    pub fn residual_x(&self) -> f64 {
        1.0 - self.eta_x
    }

    pub fn residual_y(&self) -> f64 {
        1.0 - self.eta_y
    }
}

/// Per-channel efficiencies of a quadrant detector read out with a TEM00
/// local oscillator: `eta_x = |<LO g_x, HG10>|^2` and the y analogue, with
/// the target modes following the detector orientation.
pub fn detector_efficiencies(
    geometry: &QuadrantGeometry,
    lo: &HgMode,
) -> Result<DetectorEfficiencies> {
    if lo.n != 0 || lo.m != 0 {
        return Err(Error::InvalidParameter(format!(
            "quadrant readout assumes a TEM00 local oscillator, got ({}, {})",
            lo.n, lo.m
        )));
    }
    let h10 = HgMode::new(1, 0, lo.waist)?.with_orientation(geometry.rotation);
    let h01 = HgMode::new(0, 1, lo.waist)?.with_orientation(geometry.rotation);
    let ox = masked_overlap(lo, &h10, &geometry.x_flip_mask())?;
    let oy = masked_overlap(lo, &h01, &geometry.y_flip_mask())?;
    Ok(DetectorEfficiencies { eta_x: ox * ox, eta_y: oy * oy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn uniform_mask_reproduces_the_norm() {
        let m = HgMode::new(0, 0, 1.0).unwrap();
        let val = masked_overlap(&m, &m, &GainMask::uniform()).unwrap();
        assert_relative_eq!(val, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn basis_is_orthonormal_under_uniform_mask() {
        // Gram matrix of the first four modes is the identity
        let w = 1.0;
        let basis = [
            HgMode::new(0, 0, w).unwrap(),
            HgMode::new(1, 0, w).unwrap(),
            HgMode::new(0, 1, w).unwrap(),
            HgMode::new(1, 1, w).unwrap(),
        ];
        let uniform = GainMask::uniform();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let g = masked_overlap(a, b, &uniform).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-8, "gram[{i}][{j}] = {g}");
            }
        }
    }

    #[test]
    fn flipped_mode_overlap_is_sqrt_two_over_pi() {
        let lo = HgMode::new(0, 0, 1.0).unwrap();
        let sig = HgMode::new(1, 0, 1.0).unwrap();
        let val = masked_overlap(&lo, &sig, &GainMask::split_x(1.0, -1.0)).unwrap();
        assert_relative_eq!(val, (2.0 / PI).sqrt(), epsilon = 1e-9);
        assert_relative_eq!(val * val, 2.0 / PI, epsilon = 1e-9);
    }

    #[test]
    fn flip_mask_is_blind_to_the_orthogonal_mode() {
        let lo = HgMode::new(0, 0, 1.0).unwrap();
        let sig = HgMode::new(0, 1, 1.0).unwrap();
        let val = masked_overlap(&lo, &sig, &GainMask::split_x(1.0, -1.0)).unwrap();
        assert!(val.abs() < 1e-9);
    }

    #[test]
    fn waist_mismatch_is_rejected() {
        let a = HgMode::new(0, 0, 1.0).unwrap();
        let b = HgMode::new(1, 0, 1.5).unwrap();
        assert!(matches!(
            masked_overlap(&a, &b, &GainMask::uniform()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn overlapping_regions_are_rejected() {
        let mask = GainMask {
            regions: vec![
                MaskRegion::new(-INF, INF, -INF, INF, 1.0),
                MaskRegion::new(0.0, INF, -INF, INF, 1.0),
            ],
            rotation: 0.0,
            offset: (0.0, 0.0),
            description: "broken".into(),
        };
        let m = HgMode::new(0, 0, 1.0).unwrap();
        assert!(matches!(masked_overlap(&m, &m, &mask), Err(Error::InvalidMask(_))));
    }

    #[test]
    fn gappy_masks_are_rejected() {
        let mask = GainMask {
            regions: vec![MaskRegion::new(0.0, INF, -INF, INF, 1.0)],
            rotation: 0.0,
            offset: (0.0, 0.0),
            description: "half".into(),
        };
        let m = HgMode::new(0, 0, 1.0).unwrap();
        assert!(matches!(masked_overlap(&m, &m, &mask), Err(Error::InvalidMask(_))));
    }

    #[test]
    fn centered_quadrant_efficiencies() {
        let lo = HgMode::new(0, 0, 1.0).unwrap();
        let eff = detector_efficiencies(&QuadrantGeometry::centered(), &lo).unwrap();
        assert_relative_eq!(eff.eta_x, 2.0 / PI, epsilon = 1e-6);
        assert_relative_eq!(eff.eta_y, 2.0 / PI, epsilon = 1e-6);
        assert_relative_eq!(eff.residual_x(), 1.0 - 2.0 / PI, epsilon = 1e-6);
    }

    #[test]
    fn distant_detector_sees_nothing() {
        // both split boundaries displaced far off the beam: the masks look
        // constant over the beam and the flipped-mode overlaps vanish
        let lo = HgMode::new(0, 0, 1.0).unwrap();
        let geom = QuadrantGeometry { rotation: 0.0, offset: (25.0, 25.0) };
        let eff = detector_efficiencies(&geom, &lo).unwrap();
        assert!(eff.eta_x < 1e-9);
        assert!(eff.eta_y < 1e-9);
    }

    #[test]
    fn rotated_detector_measures_the_rotated_mode() {
        // rotational covariance: a 45-degree mask sees the 45-degree mode
        // with the same 2/pi efficiency
        let lo = HgMode::new(0, 0, 1.0).unwrap();
        let geom = QuadrantGeometry { rotation: FRAC_PI_4, offset: (0.0, 0.0) };
        let eff = detector_efficiencies(&geom, &lo).unwrap();
        assert_relative_eq!(eff.eta_x, 2.0 / PI, epsilon = 1e-6);
        assert_relative_eq!(eff.eta_y, 2.0 / PI, epsilon = 1e-6);
    }

    #[test]
    fn lo_must_be_fundamental() {
        let lo = HgMode::new(1, 0, 1.0).unwrap();
        assert!(matches!(
            detector_efficiencies(&QuadrantGeometry::centered(), &lo),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn flipped_mode_expansion_tightens_with_basis_size() {
        // Parseval: the flipped TEM00 mode has unit norm; its projection onto
        // the first four modes captures 2/pi of it, and extending the basis
        // through order 3 closes part of the remaining gap (the (3,0) term
        // contributes 2/(6 pi)).
        let w = 1.0;
        let lo = HgMode::new(0, 0, w).unwrap();
        let flip = GainMask::split_x(1.0, -1.0);
        let project = |n: u32, m: u32| {
            let target = HgMode::new(n, m, w).unwrap();
            masked_overlap(&lo, &target, &flip).unwrap()
        };
        let four: f64 = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(n, m)| project(n, m).powi(2))
            .sum();
        let ten: f64 = [
            (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
        ]
        .iter()
        .map(|&(n, m)| project(n, m).powi(2))
        .sum();
        assert!(four <= 1.0 + 1e-9);
        assert!(ten <= 1.0 + 1e-9);
        assert_relative_eq!(four, 2.0 / PI, epsilon = 1e-8);
        assert_relative_eq!(ten, 2.0 / PI + 2.0 / (6.0 * PI), epsilon = 1e-8);
        assert!(1.0 - ten < 1.0 - four);
    }
}
