//! System-level configuration: dimensions, powers, carrier, and placements.
//!
//! All quantities are stored in SI units (meters, watts, hertz); decibel
//! conversions happen at the I/O boundary, never inside the pipeline.

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Point3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reflecting-panel layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisShape {
    /// Linear panel along the y-axis.
    Ula,
    /// Planar panel in the y–z plane (`n_y`·`n_z` elements, y-major order).
    Upa { n_y: usize, n_z: usize },
}

/// Statistical model for the user→panel links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserLinkModel {
    /// Spherical-wavefront direct path plus `n_scatter` single-bounce paths.
    NearField { n_scatter: usize },
    /// i.i.d. CN(0,1) entries; keeps unit tests free of geometry.
    IidGaussian,
}

/// Full description of one simulated uplink.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Base-station antennas.
    pub n: usize,
    /// Base-station RF chains (combiner output width).
    pub n_rf: usize,
    /// Reflecting elements.
    pub m: usize,
    /// Number of column pieces the panel is split into.
    pub q: usize,
    /// Users.
    pub k: usize,
    /// Antennas per user.
    pub l: usize,
    /// Pilot symbols per subframe.
    pub t: usize,
    /// Per-user transmit power, W.
    pub power_w: f64,
    /// Receiver noise variance per antenna per symbol, W.
    pub noise_var_w: f64,
    /// Carrier wavelength, m.
    pub lambda_m: f64,
    /// Carrier frequency, Hz. Must satisfy `lambda_m = c / f_c_hz`.
    pub f_c_hz: f64,
    /// Base-station array center.
    pub bs_center: Point3,
    /// Panel center.
    pub ris_center: Point3,
    /// Panel layout.
    pub ris_shape: RisShape,
    /// Fixed y-coordinate of every user array center, m.
    pub user_y_m: f64,
    /// Fixed z-coordinate of every user array center, m.
    pub user_z_m: f64,
    /// Users' x-coordinates are drawn uniformly from this range, m.
    pub user_x_range_m: (f64, f64),
    /// Single-bounce paths on the panel→base-station link.
    pub n_scatter_rb: usize,
    /// User-link model.
    pub user_link: UserLinkModel,
    /// Base seed for reproducible realizations.
    pub rng_seed: u64,
}

impl SystemConfig {
    /// Desk-scale reference configuration: a 32-antenna base station with 4
    /// RF chains at (50, 20, 5) m, a 64-element linear panel at (0, 0, 10) m,
    /// 4 two-antenna users on the far side, 6 mm carrier, −169 dBm noise.
    pub fn desk() -> Self {
        let lambda_m = 0.006;
        Self {
            n: 32,
            n_rf: 4,
            m: 64,
            q: 4,
            k: 4,
            l: 2,
            t: 8,
            power_w: 1.0,
            noise_var_w: 10f64.powf((-169.0 - 30.0) / 10.0),
            lambda_m,
            f_c_hz: SPEED_OF_LIGHT / lambda_m,
            bs_center: [50.0, 20.0, 5.0],
            ris_center: [0.0, 0.0, 10.0],
            ris_shape: RisShape::Ula,
            user_y_m: -20.0,
            user_z_m: 5.0,
            user_x_range_m: (20.0, 30.0),
            n_scatter_rb: 3,
            user_link: UserLinkModel::NearField { n_scatter: 3 },
            rng_seed: 0,
        }
    }

    /// Combiner blocks needed to cover all antennas: N / N_RF.
    #[inline]
    pub fn b(&self) -> usize {
        self.n / self.n_rf
    }

    /// Columns per piece: M / Q.
    #[inline]
    pub fn m_sub(&self) -> usize {
        self.m / self.q
    }

    /// Total pilot streams K·L.
    #[inline]
    pub fn kl(&self) -> usize {
        self.k * self.l
    }

    /// Element pitch (half-wavelength).
    #[inline]
    pub fn spacing_m(&self) -> f64 {
        self.lambda_m / 2.0
    }

    /// Base-station array (linear, along y).
    pub fn bs_array(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::ula(self.bs_center, self.n, self.spacing_m())
    }

    /// Reflecting panel array.
    pub fn ris_array(&self) -> Result<ArrayGeometry> {
        match self.ris_shape {
            RisShape::Ula => ArrayGeometry::ula(self.ris_center, self.m, self.spacing_m()),
            RisShape::Upa { n_y, n_z } => {
                ArrayGeometry::upa(self.ris_center, n_y, n_z, self.spacing_m())
            }
        }
    }

    /// Array of one user whose center sits at x-coordinate `x_m`.
    pub fn user_array(&self, x_m: f64) -> Result<ArrayGeometry> {
        ArrayGeometry::ula([x_m, self.user_y_m, self.user_z_m], self.l, self.spacing_m())
    }

    /// Check every structural invariant; call before running anything.
    pub fn validate(&self) -> Result<()> {
        fn dim(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be ≥ 1")));
            }
            Ok(())
        }
        dim("n", self.n)?;
        dim("n_rf", self.n_rf)?;
        dim("m", self.m)?;
        dim("q", self.q)?;
        dim("k", self.k)?;
        dim("l", self.l)?;
        dim("t", self.t)?;
        if self.n_rf > self.n {
            return Err(Error::Config(format!(
                "n_rf = {} exceeds n = {}",
                self.n_rf, self.n
            )));
        }
        if self.n % self.n_rf != 0 {
            return Err(Error::Config(format!(
                "n = {} must be a multiple of n_rf = {}",
                self.n, self.n_rf
            )));
        }
        if self.q > self.m {
            return Err(Error::Config(format!("q = {} exceeds m = {}", self.q, self.m)));
        }
        if self.m % self.q != 0 {
            return Err(Error::Config(format!(
                "m = {} must be a multiple of q = {}",
                self.m, self.q
            )));
        }
        if self.t < self.kl() {
            return Err(Error::Config(format!(
                "t = {} must be ≥ k·l = {} for orthogonal pilots",
                self.t,
                self.kl()
            )));
        }
        if !(self.power_w > 0.0 && self.power_w.is_finite()) {
            return Err(Error::Config(format!("power_w = {} must be finite > 0", self.power_w)));
        }
        if !(self.noise_var_w >= 0.0 && self.noise_var_w.is_finite()) {
            return Err(Error::Config(format!(
                "noise_var_w = {} must be finite ≥ 0",
                self.noise_var_w
            )));
        }
        if !(self.lambda_m > 0.0) || !(self.f_c_hz > 0.0) {
            return Err(Error::Config("lambda_m and f_c_hz must be > 0".into()));
        }
        let lambda_from_fc = SPEED_OF_LIGHT / self.f_c_hz;
        if (self.lambda_m - lambda_from_fc).abs() > 1e-9 * self.lambda_m {
            return Err(Error::Config(format!(
                "lambda_m = {} inconsistent with c/f_c_hz = {}",
                self.lambda_m, lambda_from_fc
            )));
        }
        if let RisShape::Upa { n_y, n_z } = self.ris_shape {
            if n_y * n_z != self.m {
                return Err(Error::Config(format!(
                    "panel layout {n_y}×{n_z} does not contain m = {} elements",
                    self.m
                )));
            }
        }
        let (lo, hi) = self.user_x_range_m;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("user_x_range_m = ({lo}, {hi}) is not ordered")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_config_is_valid() {
        let c = SystemConfig::desk();
        c.validate().unwrap();
        assert_eq!(c.b(), 8);
        assert_eq!(c.m_sub(), 16);
        assert_eq!(c.kl(), 8);
        assert_eq!(c.t, 8);
    }

    #[test]
    fn noise_floor_conversion() {
        // −169 dBm in watts
        let c = SystemConfig::desk();
        assert!((c.noise_var_w - 1.258925411794168e-20).abs() < 1e-32);
    }

    #[test]
    fn divisibility_violations_are_rejected() {
        let mut c = SystemConfig::desk();
        c.n_rf = 5;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = SystemConfig::desk();
        c.q = 3;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = SystemConfig::desk();
        c.q = 128; // exceeds m
        assert!(c.validate().is_err());
    }

    #[test]
    fn pilot_length_must_cover_streams() {
        let mut c = SystemConfig::desk();
        c.t = 7;
        assert!(c.validate().is_err());
        c.t = 9;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn carrier_consistency_enforced_to_1e9_relative() {
        let mut c = SystemConfig::desk();
        c.f_c_hz *= 1.0 + 1e-7;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::desk();
        c.f_c_hz *= 1.0 + 1e-12;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn planar_panel_must_match_element_count() {
        let mut c = SystemConfig::desk();
        c.ris_shape = RisShape::Upa { n_y: 32, n_z: 2 };
        assert!(c.validate().is_ok());
        c.ris_shape = RisShape::Upa { n_y: 32, n_z: 3 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_noise_is_allowed() {
        let mut c = SystemConfig::desk();
        c.noise_var_w = 0.0;
        assert!(c.validate().is_ok());
        c.power_w = 0.0;
        assert!(c.validate().is_err());
    }
}
