//! Multimode Gaussian states of light and the symplectic transforms of the
//! optical chain: squeezed-thermal sources, phase shifts, spatial basis
//! rotation, loss, and analytic homodyne quadrature variances.
//!
//! Conventions: quadratures are ordered `x1, p1, x2, p2, ...` and the vacuum
//! variance is 1 (shot-noise units), so squeezing levels in dB map directly to
//! `10^(dB/10)` on the diagonal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Slack allowed on the uncertainty bound `nu_min >= 1` to absorb float drift
/// over chained transforms.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

/// Convert a noise level in dB relative to shot noise to a variance in
/// shot-noise units.
pub fn db_to_variance(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a variance in shot-noise units to dB relative to shot noise.
pub fn variance_to_db(var: f64) -> f64 {
    10.0 * var.log10()
}

/// Label of one spatial mode carried by the state.
///
/// `n`, `m` are the Hermite-Gaussian order indices; only modes of equal total
/// order `n + m` may be mixed by a spatial basis rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLabel {
    pub name: String,
    pub n: u32,
    pub m: u32,
    /// Rotation of the mode pattern about the beam axis, normalized to [0, pi).
    pub orientation: f64,
}

impl ModeLabel {
    pub fn new(name: impl Into<String>, n: u32, m: u32, orientation: f64) -> Self {
        let mut o = orientation % std::f64::consts::PI;
        if o < 0.0 {
            o += std::f64::consts::PI;
        }
        ModeLabel { name: name.into(), n, m, orientation: o }
    }

    /// Standard label `HG{n}{m}` with zero orientation.
    pub fn hg(n: u32, m: u32) -> Self {
        Self::new(format!("HG{n}{m}"), n, m, 0.0)
    }

    pub fn order(&self) -> u32 {
        self.n + self.m
    }
}

/// Squeezed-thermal source parameterized by the measured extremal noise
/// levels. `squeezing_db <= 0` is the minimum variance, `antisqueezing_db >= 0`
/// the maximum, and `squeezing_angle` orients the ellipse in phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezerSpec {
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    pub squeezing_angle: f64,
}

impl SqueezerSpec {
    pub fn new(squeezing_db: f64, antisqueezing_db: f64, squeezing_angle: f64) -> Self {
        SqueezerSpec { squeezing_db, antisqueezing_db, squeezing_angle }
    }

    /// Pure squeezer: antisqueezing mirrors the squeezing level exactly.
    pub fn pure(squeezing_db: f64, squeezing_angle: f64) -> Self {
        Self::new(squeezing_db, -squeezing_db, squeezing_angle)
    }

    /// Minimum-variance quadrature in shot-noise units.
    pub fn min_variance(&self) -> f64 {
        db_to_variance(self.squeezing_db)
    }

    /// Maximum-variance quadrature in shot-noise units.
    pub fn max_variance(&self) -> f64 {
        db_to_variance(self.antisqueezing_db)
    }

    /// A squeezed thermal state must satisfy `Vmin * Vmax >= 1`, which in dB
    /// space is exactly `squeezing_db + antisqueezing_db >= 0`.
    pub fn validate(&self) -> Result<()> {
        if !self.squeezing_db.is_finite()
            || !self.antisqueezing_db.is_finite()
            || !self.squeezing_angle.is_finite()
        {
            return Err(Error::UnphysicalState("non-finite squeezer parameter".into()));
        }
        if self.squeezing_db > 0.0 {
            return Err(Error::UnphysicalState(format!(
                "squeezing_db must be <= 0, got {}",
                self.squeezing_db
            )));
        }
        if self.antisqueezing_db < 0.0 {
            return Err(Error::UnphysicalState(format!(
                "antisqueezing_db must be >= 0, got {}",
                self.antisqueezing_db
            )));
        }
        if self.squeezing_db + self.antisqueezing_db < 0.0 {
            return Err(Error::UnphysicalState(format!(
                "variance product below the uncertainty bound: {} dB + {} dB < 0",
                self.squeezing_db, self.antisqueezing_db
            )));
        }
        Ok(())
    }
}

/// Zero-mean-capable Gaussian state over `N` labeled spatial modes.
///
/// The covariance is kept exactly symmetric by re-symmetrizing after every
/// transform.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: Vec<ModeLabel>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Vacuum over the given modes: zero mean, identity covariance.
    pub fn vacuum(modes: Vec<ModeLabel>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidModeSet("mode list is empty".into()));
        }
        for (i, a) in modes.iter().enumerate() {
            for b in modes.iter().skip(i + 1) {
                if a.name == b.name {
                    return Err(Error::InvalidModeSet(format!("duplicate mode `{}`", a.name)));
                }
            }
        }
        let dim = 2 * modes.len();
        Ok(GaussianState {
            modes,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim),
        })
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mode_index(&self, name: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMode(name.into()))
    }

    fn symmetrize(&mut self) {
        let t = self.cov.transpose();
        self.cov = (&self.cov + t) * 0.5;
    }

    /// Apply an arbitrary linear map `mean -> X mean`, `cov -> X cov X^T + Y`.
    fn apply_channel(&self, x: &DMatrix<f64>, y: Option<&DMatrix<f64>>) -> Self {
        let mut out = self.clone();
        out.mean = x * &self.mean;
        out.cov = x * &self.cov * x.transpose();
        if let Some(y) = y {
            out.cov += y;
        }
        out.symmetrize();
        out
    }

    /// Replace one mode's 2x2 covariance block with a squeezed-thermal block
    /// `R(angle) diag(Vmin, Vmax) R(angle)^T`, leaving everything else
    /// untouched. Intended for source preparation; errors if the resulting
    /// state violates the uncertainty bound (e.g. when the target mode is
    /// already correlated with others).
    pub fn apply_squeezed_thermal(&self, mode: &str, spec: &SqueezerSpec) -> Result<Self> {
        spec.validate()?;
        let k = self.mode_index(mode)?;
        let (vmin, vmax) = (spec.min_variance(), spec.max_variance());
        let (c, s) = (spec.squeezing_angle.cos(), spec.squeezing_angle.sin());
        // R diag(vmin, vmax) R^T
        let b00 = vmin * c * c + vmax * s * s;
        let b01 = (vmin - vmax) * c * s;
        let b11 = vmin * s * s + vmax * c * c;

        let mut out = self.clone();
        out.cov[(2 * k, 2 * k)] = b00;
        out.cov[(2 * k, 2 * k + 1)] = b01;
        out.cov[(2 * k + 1, 2 * k)] = b01;
        out.cov[(2 * k + 1, 2 * k + 1)] = b11;
        out.symmetrize();
        if !out.is_physical() {
            return Err(Error::UnphysicalState(format!(
                "squeezed-thermal block on `{mode}` breaks the uncertainty bound \
                 (mode correlated with the rest of the state?)"
            )));
        }
        Ok(out)
    }

    /// Phase-space rotation of one mode by `phi`.
    pub fn apply_phase(&self, mode: &str, phi: f64) -> Result<Self> {
        let k = self.mode_index(mode)?;
        let n = 2 * self.num_modes();
        let mut x = DMatrix::identity(n, n);
        let (c, s) = (phi.cos(), phi.sin());
        x[(2 * k, 2 * k)] = c;
        x[(2 * k, 2 * k + 1)] = -s;
        x[(2 * k + 1, 2 * k)] = s;
        x[(2 * k + 1, 2 * k + 1)] = c;
        Ok(self.apply_channel(&x, None))
    }

    /// Mix two same-order modes: `x_a' = cos(theta) x_a + sin(theta) x_b`
    /// (and identically for `p`), i.e. a lossless beamsplitter of
    /// transmittance `cos^2(theta)` realized as a rotation of the spatial
    /// measurement basis.
    pub fn apply_basis_rotation(&self, mode_a: &str, mode_b: &str, theta: f64) -> Result<Self> {
        let ka = self.mode_index(mode_a)?;
        let kb = self.mode_index(mode_b)?;
        if ka == kb {
            return Err(Error::InvalidParameter("basis rotation needs two distinct modes".into()));
        }
        let (la, lb) = (&self.modes[ka], &self.modes[kb]);
        if la.order() != lb.order() {
            return Err(Error::OrderMismatch(format!(
                "`{}` has order {}, `{}` has order {}",
                la.name,
                la.order(),
                lb.name,
                lb.order()
            )));
        }
        Ok(self.apply_channel(&basis_rotation_matrix(self.num_modes(), ka, kb, theta), None))
    }

    /// Pure loss channel of transmittance `eta` on one mode.
    pub fn apply_loss(&self, mode: &str, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "transmittance must lie in [0, 1], got {eta}"
            )));
        }
        let k = self.mode_index(mode)?;
        let n = 2 * self.num_modes();
        let mut x = DMatrix::identity(n, n);
        let r = eta.sqrt();
        x[(2 * k, 2 * k)] = r;
        x[(2 * k + 1, 2 * k + 1)] = r;
        let mut y = DMatrix::zeros(n, n);
        y[(2 * k, 2 * k)] = 1.0 - eta;
        y[(2 * k + 1, 2 * k + 1)] = 1.0 - eta;
        Ok(self.apply_channel(&x, Some(&y)))
    }

    /// Homodyne variance of the quadrature `sum_k c_k X_k(phi)` with
    /// `X_k(phi) = x_k cos(phi) + p_k sin(phi)`. Coefficients must be
    /// normalized so the vacuum reads 1 at every phase.
    pub fn quadrature_variance(&self, coeffs: &[f64], phi: f64) -> Result<f64> {
        let norm: f64 = coeffs.iter().map(|c| c * c).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "quadrature coefficients must be normalized (sum of squares = {norm})"
            )));
        }
        self.quadrature_covariance(coeffs, phi, coeffs, phi)
    }

    /// Covariance of two homodyne observables defined by coefficient vectors
    /// and LO phases: `q_a^T cov q_b`. No normalization is imposed.
    pub fn quadrature_covariance(
        &self,
        coeffs_a: &[f64],
        phi_a: f64,
        coeffs_b: &[f64],
        phi_b: f64,
    ) -> Result<f64> {
        let qa = self.quadrature_vector(coeffs_a, phi_a)?;
        let qb = self.quadrature_vector(coeffs_b, phi_b)?;
        Ok((qa.transpose() * &self.cov * qb)[(0, 0)])
    }

    fn quadrature_vector(&self, coeffs: &[f64], phi: f64) -> Result<DVector<f64>> {
        if coeffs.len() != self.num_modes() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                self.num_modes(),
                coeffs.len()
            )));
        }
        let mut q = DVector::zeros(2 * self.num_modes());
        let (c, s) = (phi.cos(), phi.sin());
        for (k, ck) in coeffs.iter().enumerate() {
            q[2 * k] = ck * c;
            q[2 * k + 1] = ck * s;
        }
        Ok(q)
    }

    /// Sum and difference variances of two modes, normalized so the vacuum
    /// reference is 1: `V_sum = Var[(X_a(phi) + X_b(phi)) / sqrt(2)]` and
    /// `V_diff = Var[(X_a(phi + pi/2) - X_b(phi + pi/2)) / sqrt(2)]`.
    pub fn sum_diff_variances(&self, mode_a: &str, mode_b: &str, phi: f64) -> Result<(f64, f64)> {
        let ka = self.mode_index(mode_a)?;
        let kb = self.mode_index(mode_b)?;
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut sum = vec![0.0; self.num_modes()];
        let mut diff = vec![0.0; self.num_modes()];
        sum[ka] = inv;
        sum[kb] = inv;
        diff[ka] = inv;
        diff[kb] = -inv;
        let v_sum = self.quadrature_variance(&sum, phi)?;
        let v_diff = self.quadrature_variance(&diff, phi + std::f64::consts::FRAC_PI_2)?;
        Ok((v_sum, v_diff))
    }

    /// Symplectic eigenvalues of the covariance matrix, descending.
    ///
    /// Computed as the paired singular values of `S Omega S` with
    /// `S = cov^(1/2)`; a physical state has all of them >= 1.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let n = self.num_modes();
        let eig = self.cov.clone().symmetric_eigen();
        let sqrt_vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
        let s = &eig.eigenvectors
            * DMatrix::from_diagonal(&DVector::from_vec(sqrt_vals))
            * eig.eigenvectors.transpose();
        let a = &s * symplectic_form(n) * &s;
        let svd = a.svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        // singular values come in degenerate pairs (nu, nu); average each pair
        (0..n).map(|k| 0.5 * (sv[2 * k] + sv[2 * k + 1])).collect()
    }

    /// Uncertainty-relation check with the crate-wide slack.
    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues()
            .iter()
            .all(|&nu| nu >= 1.0 - PHYSICALITY_SLACK)
    }
}

/// Block symplectic form `Omega = diag([[0, 1], [-1, 0]], ...)` in the
/// `x1, p1, x2, p2, ...` ordering.
pub fn symplectic_form(num_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * num_modes, 2 * num_modes);
    for k in 0..num_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Full 2N x 2N matrix of the basis-rotation (beamsplitter) transform acting
/// on modes `ka`, `kb`.
pub fn basis_rotation_matrix(num_modes: usize, ka: usize, kb: usize, theta: f64) -> DMatrix<f64> {
    let n = 2 * num_modes;
    let mut x = DMatrix::identity(n, n);
    let (c, s) = (theta.cos(), theta.sin());
    for off in 0..2 {
        let (ia, ib) = (2 * ka + off, 2 * kb + off);
        x[(ia, ia)] = c;
        x[(ia, ib)] = s;
        x[(ib, ia)] = -s;
        x[(ib, ib)] = c;
    }
    x
}
