//! Phase-space simulator for squeezing and entanglement between the
//! first-order Hermite-Gaussian modes of a single laser beam.
//!
//! The crate models the full measurement chain: squeezed-thermal sources in
//! the `HG10`/`HG01` modes, a cylindrical-lens Gouy phase shifter, rotation of
//! the spatial measurement basis, quadrant-detector multi-pixel homodyning
//! with shot-noise-calibrated photocurrent time series, and the
//! inseparability criterion `I = sqrt(V_sum * V_diff)`.

pub mod detection;
pub mod error;
pub mod gaussian;
pub mod metrics;
pub mod modes;
pub mod scenario;

pub use error::{Error, Result};
