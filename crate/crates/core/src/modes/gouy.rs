//! Gouy phase accumulated through the symmetric two-cylindrical-lens system,
//! computed by propagating the complex beam parameter per transverse axis
//! through the lens/free-space ABCD chain.
//!
//! Phases are accumulated between the plane of the first lens and the plane
//! of the second; a mode-matched beam leaves the system with the same beam
//! parameter on both axes, so no further differential builds up downstream.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Rayleigh range of a Gaussian beam with the given waist and wavelength.
pub fn rayleigh_range(waist: f64, wavelength: f64) -> f64 {
    std::f64::consts::PI * waist * waist / wavelength
}

/// Which transverse axis the cylindrical lenses act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensAxis {
    X,
    Y,
}

/// Gaussian beam parameter of one transverse axis, referenced to the plane of
/// the first lens: `q(0) = -waist_position + i * rayleigh_range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameter {
    /// Position of the waist downstream of the first lens (negative when the
    /// waist lies upstream).
    pub waist_position: f64,
    pub rayleigh_range: f64,
}

impl BeamParameter {
    pub fn new(waist_position: f64, rayleigh_range: f64) -> Result<Self> {
        if !(rayleigh_range > 0.0) || !rayleigh_range.is_finite() || !waist_position.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "degenerate beam parameter: waist at {waist_position}, \
                 Rayleigh range {rayleigh_range}"
            )));
        }
        Ok(BeamParameter { waist_position, rayleigh_range })
    }

    fn q(&self) -> Complex64 {
        Complex64::new(-self.waist_position, self.rayleigh_range)
    }
}

/// Symmetric pair of cylindrical lenses of focal length `f` separated by `d`,
/// acting on one transverse axis only.
#[derive(Debug, Clone, PartialEq)]
pub struct CylLensSystem {
    pub focal_length: f64,
    pub separation: f64,
    pub axis: LensAxis,
    pub input_x: BeamParameter,
    pub input_y: BeamParameter,
}

impl CylLensSystem {
    pub fn new(
        focal_length: f64,
        separation: f64,
        axis: LensAxis,
        input_x: BeamParameter,
        input_y: BeamParameter,
    ) -> Result<Self> {
        if !(focal_length > 0.0) || !focal_length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "focal length must be positive, got {focal_length}"
            )));
        }
        if !(separation >= 0.0) || !separation.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lens separation must be non-negative, got {separation}"
            )));
        }
        Ok(CylLensSystem { focal_length, separation, axis, input_x, input_y })
    }

    /// The standard matched input: a stigmatic beam whose waist sits at the
    /// system midpoint with Rayleigh range `(d/2) sqrt((f + d/2)/(f - d/2))`,
    /// so the beam inside the converter is symmetric about the midplane and
    /// leaves with its input parameter restored.
    pub fn mode_matched(focal_length: f64, separation: f64, axis: LensAxis) -> Result<Self> {
        if !(separation > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mode matching needs a positive lens separation, got {separation}"
            )));
        }
        let a = 0.5 * separation;
        if !(focal_length > a) {
            return Err(Error::InvalidParameter(format!(
                "mode matching needs d < 2f, got d = {separation}, f = {focal_length}"
            )));
        }
        let zr = a * ((focal_length + a) / (focal_length - a)).sqrt();
        let beam = BeamParameter::new(a, zr)?;
        Self::new(focal_length, separation, axis, beam, beam)
    }

    /// ABCD matrix of the lens axis: lens(f) . space(d) . lens(f).
    pub fn lens_axis_abcd(&self) -> [[f64; 2]; 2] {
        let (f, d) = (self.focal_length, self.separation);
        [[1.0 - d / f, d], [d / (f * f) - 2.0 / f, 1.0 - d / f]]
    }

    /// Accumulated fundamental-mode Gouy phase per axis between the two lens
    /// planes.
    pub fn gouy_phases(&self) -> Result<GouyPhases> {
        let (f, d) = (self.focal_length, self.separation);
        let lensed = |beam: &BeamParameter| -> f64 {
            let q0 = lens(beam.q(), f);
            free_space_gouy(q0, d)
        };
        let free = |beam: &BeamParameter| -> f64 { free_space_gouy(beam.q(), d) };
        let (psi_x, psi_y) = match self.axis {
            LensAxis::X => (lensed(&self.input_x), free(&self.input_y)),
            LensAxis::Y => (free(&self.input_x), lensed(&self.input_y)),
        };
        Ok(GouyPhases { psi_x, psi_y })
    }
}

/// Thin lens: 1/q' = 1/q - 1/f.
fn lens(q: Complex64, f: f64) -> Complex64 {
    q * f / (f - q)
}

/// Gouy phase over a free-space segment of length `len`. With Im(q) > 0 the
/// argument stays in (0, pi), so the difference is single-valued.
fn free_space_gouy(q: Complex64, len: f64) -> f64 {
    q.arg() - (q + len).arg()
}

/// Per-axis fundamental Gouy phases. A mode of order `(n, m)` accumulates
/// `(n + 1/2) psi_x + (m + 1/2) psi_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GouyPhases {
    pub psi_x: f64,
    pub psi_y: f64,
}

impl GouyPhases {
    pub fn mode_phase(&self, n: u32, m: u32) -> f64 {
        (n as f64 + 0.5) * self.psi_x + (m as f64 + 0.5) * self.psi_y
    }

    /// Relative phase between the first-order pair (HG10 minus HG01).
    pub fn first_order_differential(&self) -> f64 {
        self.psi_x - self.psi_y
    }
}
