//! Classical transverse-mode mathematics: Hermite-Gaussian amplitudes,
//! overlap integrals against pixelated detector masks, rotated-basis
//! decompositions, and the Gouy phase of the cylindrical-lens shifter.

pub mod gouy;
pub mod mask;
pub mod quad;

pub use gouy::{rayleigh_range, BeamParameter, CylLensSystem, GouyPhases, LensAxis};
pub use mask::{
    detector_efficiencies, masked_overlap, DetectorEfficiencies, GainMask, MaskRegion,
    QuadrantGeometry,
};

use crate::error::{Error, Result};

/// Normalized Hermite-Gaussian transverse mode at its waist plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgMode {
    pub n: u32,
    pub m: u32,
    pub waist: f64,
    /// Rotation of the mode pattern about the beam axis, radians.
    pub orientation: f64,
}

impl HgMode {
    pub fn new(n: u32, m: u32, waist: f64) -> Result<Self> {
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(Error::InvalidParameter(format!("waist must be positive, got {waist}")));
        }
        Ok(HgMode { n, m, waist, orientation: 0.0 })
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn order(&self) -> u32 {
        self.n + self.m
    }

    /// Real amplitude `u_nm(x, y)` at the waist plane, normalized to unit L2
    /// norm over the plane, with the pattern rotated by `orientation`.
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        let (c, s) = (self.orientation.cos(), self.orientation.sin());
        // pattern rotated by +theta: sample the unrotated profile at R(-theta) p
        let xr = c * x + s * y;
        let yr = -s * x + c * y;
        amplitude_1d(self.n, self.waist, xr) * amplitude_1d(self.m, self.waist, yr)
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let mut h0 = 1.0;
            let mut h1 = 2.0 * x;
            for k in 1..n {
                let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

fn amplitude_1d(n: u32, waist: f64, x: f64) -> f64 {
    let xi = std::f64::consts::SQRT_2 * x / waist;
    let two_n_fact: f64 = (1..=n).fold(1.0, |acc, k| acc * 2.0 * k as f64);
    let norm = ((2.0 / std::f64::consts::PI).sqrt() / (two_n_fact * waist)).sqrt();
    norm * hermite(n, xi) * (-x * x / (waist * waist)).exp()
}

/// Expansion of the `(n, m)` mode rotated by `theta` over the same-order
/// Hermite-Gaussian basis `{(order, 0), (order-1, 1), ..., (0, order)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedDecomposition {
    /// `(n, m)` index of each basis mode and its coefficient.
    pub coefficients: Vec<((u32, u32), f64)>,
    /// True when the closed form applies (total order <= 1); false when the
    /// coefficients came from numerical projection.
    pub exact: bool,
}

impl RotatedDecomposition {
    pub fn coefficient(&self, n: u32, m: u32) -> f64 {
        self.coefficients
            .iter()
            .find(|(idx, _)| *idx == (n, m))
            .map(|(_, c)| *c)
            .unwrap_or(0.0)
    }

    pub fn norm_squared(&self) -> f64 {
        self.coefficients.iter().map(|(_, c)| c * c).sum()
    }
}

/// Decompose a rotated mode onto the unrotated same-order basis.
///
/// First-order modes rotate exactly like a 2-vector; higher orders fall back
/// to numerical projection (flagged through `exact`).
pub fn rotated_decomposition(n: u32, m: u32, theta: f64) -> Result<RotatedDecomposition> {
    let order = n + m;
    if order == 0 {
        return Ok(RotatedDecomposition { coefficients: vec![((0, 0), 1.0)], exact: true });
    }
    if order == 1 {
        let (c, s) = (theta.cos(), theta.sin());
        let coefficients = if n == 1 {
            vec![((1, 0), c), ((0, 1), s)]
        } else {
            vec![((1, 0), -s), ((0, 1), c)]
        };
        return Ok(RotatedDecomposition { coefficients, exact: true });
    }
    numeric_decomposition(n, m, theta, order)
}

fn numeric_decomposition(n: u32, m: u32, theta: f64, order: u32) -> Result<RotatedDecomposition> {
    let waist = 1.0;
    let rotated = HgMode::new(n, m, waist)?.with_orientation(theta);
    let half = 6.0 * waist;
    let mut coefficients = Vec::with_capacity(order as usize + 1);
    for k in (0..=order).rev() {
        let basis = HgMode::new(k, order - k, waist)?;
        let c = quad::integrate_rect([-half, half, -half, half], 1e-10, &|x, y| {
            rotated.amplitude(x, y) * basis.amplitude(x, y)
        })?;
        coefficients.push(((k, order - k), c));
    }
    Ok(RotatedDecomposition { coefficients, exact: false })
}
