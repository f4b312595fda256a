//! Scenario files: a named experiment = base system description + exactly one
//! sweep axis + methods + trial count + seed. TOML with unknown keys rejected.
//!
//! # Example
//! ```
//! let text = r#"
//! name = "demo"
//! methods = ["pwclra-ls"]
//! trials = 2
//! base_seed = 7
//!
//! [system]
//! snr_db = 10.0
//!
//! [sweep]
//! q = [1, 4]
//! "#;
//! let sc = pwclra_sim::scenario::Scenario::from_toml(text).unwrap();
//! assert_eq!(sc.points().unwrap().len(), 2);
//! ```

use pwclra::config::{RisShape, SystemConfig, UserLinkModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Estimation methods the runner can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pwclra-ls")]
    PwclraLs,
    #[serde(rename = "pwclra-mmse")]
    PwclraMmse,
    #[serde(rename = "pwclra-jo")]
    PwclraJo,
    #[serde(rename = "clra-ls")]
    ClraLs,
    #[serde(rename = "clra-jo")]
    ClraJo,
    #[serde(rename = "2d-ls")]
    TwoDLs,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::PwclraLs => "pwclra-ls",
            Method::PwclraMmse => "pwclra-mmse",
            Method::PwclraJo => "pwclra-jo",
            Method::ClraLs => "clra-ls",
            Method::ClraJo => "clra-jo",
            Method::TwoDLs => "2d-ls",
        }
    }

    /// Whether this method runs on the single-piece (Q=1) design instead of
    /// the sweep point's Q.
    pub fn uses_single_piece_design(&self) -> bool {
        matches!(self, Method::ClraLs | Method::ClraJo)
    }
}

/// RIS panel layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Ula,
    Upa { n_y: usize, n_z: usize },
}

impl Geometry {
    pub fn label(&self) -> String {
        match self {
            Geometry::Ula => "ula".into(),
            Geometry::Upa { n_y, n_z } => format!("upa{n_y}x{n_z}"),
        }
    }
}

/// Base system description; every field optional, defaults are the desk
/// reference setup (N=32, N_RF=4, M=64, Q=4, K=4, L=2, T=8, −169 dBm noise,
/// placements at 50 m / 10 m height, 3+3 scatterers).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_rf: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Operating SNR (dB) when the sweep axis is not SNR. Default 10.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    /// Noise floor in dBm. Default −169.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_dbm: Option<f64>,
    /// Noise floor in linear watts; overrides `noise_dbm`; use 0.0 for
    /// noiseless runs. Setting both is an error.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_var_w: Option<f64>,
    /// BS distance along x in meters. Default 50; also the calibration
    /// reference for distance sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_x_rb_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    /// Scatterer count on the panel→BS link. Default 3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_scatter_rb: Option<usize>,
    /// Scatterer count on each user→panel link. Default 3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_scatter_ur: Option<usize>,
}

/// Exactly one of these lists must be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_x_rb_m: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_ris: Option<Vec<usize>>,
}

/// A parsed, validated experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub system: SystemOverrides,
    pub sweep: Sweep,
}

/// One resolved grid point of the sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub index: usize,
    pub q: usize,
    pub snr_db: f64,
    pub d_x_rb_m: f64,
    pub m: usize,
}

impl Scenario {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let sc: Scenario =
            toml::from_str(text).map_err(|e| CliError::Config(format!("scenario parse: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.name.is_empty() {
            return Err(CliError::Config("scenario name must not be empty".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("at least one method is required".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(CliError::Config(format!("duplicate method {:?}", m.as_str())));
            }
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be ≥ 1".into()));
        }
        let axes = [
            self.sweep.q.as_ref().map(Vec::len),
            self.sweep.snr_db.as_ref().map(Vec::len),
            self.sweep.d_x_rb_m.as_ref().map(Vec::len),
            self.sweep.m_ris.as_ref().map(Vec::len),
        ];
        let present: Vec<usize> = axes.iter().flatten().copied().collect();
        if present.len() != 1 {
            return Err(CliError::Config(format!(
                "exactly one sweep axis must be set, found {}",
                present.len()
            )));
        }
        if present[0] == 0 {
            return Err(CliError::Config("the sweep axis must not be empty".into()));
        }
        if self.sweep.snr_db.is_some() && self.system.snr_db.is_some() {
            return Err(CliError::Config(
                "system.snr_db conflicts with an SNR sweep; remove one".into(),
            ));
        }
        if self.sweep.d_x_rb_m.is_some() && self.system.d_x_rb_m.is_some() {
            return Err(CliError::Config(
                "system.d_x_rb_m is the calibration reference and cannot be set \
                 together with a distance sweep; remove one"
                    .into(),
            ));
        }
        if self.system.noise_dbm.is_some() && self.system.noise_var_w.is_some() {
            return Err(CliError::Config(
                "set either noise_dbm or noise_var_w, not both".into(),
            ));
        }
        if let Some(w) = self.system.noise_var_w {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(CliError::Config(format!("noise_var_w = {w} must be finite ≥ 0")));
            }
        }
        // every point must produce a valid system description
        for p in self.points()? {
            self.config_at(&p)?;
        }
        Ok(())
    }

    /// Fixed operating SNR used when SNR is not the sweep axis.
    pub fn fixed_snr_db(&self) -> f64 {
        self.system.snr_db.unwrap_or(10.0)
    }

    /// Reference distance (m) for power calibration.
    pub fn reference_distance_m(&self) -> f64 {
        self.system.d_x_rb_m.unwrap_or(50.0)
    }

    fn noise_var_w(&self) -> f64 {
        match (self.system.noise_var_w, self.system.noise_dbm) {
            (Some(w), _) => w,
            (None, Some(dbm)) => 10f64.powf((dbm - 30.0) / 10.0),
            (None, None) => SystemConfig::desk().noise_var_w,
        }
    }

    /// Expand the sweep into concrete grid points.
    pub fn points(&self) -> CliResult<Vec<SweepPoint>> {
        let base_q = self.system.q.unwrap_or(4);
        let base_m = self.system.m.unwrap_or(64);
        let snr = self.fixed_snr_db();
        let dist = self.reference_distance_m();
        let mk = |index, q, snr_db, d_x_rb_m, m| SweepPoint { index, q, snr_db, d_x_rb_m, m };
        let pts = if let Some(qs) = &self.sweep.q {
            qs.iter().enumerate().map(|(i, &q)| mk(i, q, snr, dist, base_m)).collect()
        } else if let Some(snrs) = &self.sweep.snr_db {
            snrs.iter().enumerate().map(|(i, &s)| mk(i, base_q, s, dist, base_m)).collect()
        } else if let Some(ds) = &self.sweep.d_x_rb_m {
            ds.iter().enumerate().map(|(i, &d)| mk(i, base_q, snr, d, base_m)).collect()
        } else if let Some(ms) = &self.sweep.m_ris {
            ms.iter().enumerate().map(|(i, &m)| mk(i, base_q, snr, dist, m)).collect()
        } else {
            return Err(CliError::Config("no sweep axis set".into()));
        };
        Ok(pts)
    }

    /// Geometry label for result rows.
    pub fn geometry(&self) -> Geometry {
        self.system.geometry.unwrap_or(Geometry::Ula)
    }

    /// Short label of a sweep point along the active axis, for summaries.
    pub fn axis_desc(&self, point: &SweepPoint) -> String {
        if self.sweep.q.is_some() {
            format!("Q={}", point.q)
        } else if self.sweep.snr_db.is_some() {
            format!("SNR={} dB", point.snr_db)
        } else if self.sweep.d_x_rb_m.is_some() {
            format!("d={} m", point.d_x_rb_m)
        } else {
            format!("M={}", point.m)
        }
    }

    /// Build the validated system description for one sweep point.
    /// `power_w` starts at 1 W; the runner overwrites it after calibration.
    pub fn config_at(&self, point: &SweepPoint) -> CliResult<SystemConfig> {
        let mut cfg = SystemConfig::desk();
        cfg.n = self.system.n.unwrap_or(cfg.n);
        cfg.n_rf = self.system.n_rf.unwrap_or(cfg.n_rf);
        cfg.k = self.system.k.unwrap_or(cfg.k);
        cfg.l = self.system.l.unwrap_or(cfg.l);
        cfg.t = self.system.t.unwrap_or(cfg.k * cfg.l);
        cfg.m = point.m;
        cfg.q = point.q;
        cfg.power_w = 1.0;
        cfg.noise_var_w = self.noise_var_w();
        cfg.bs_center[0] = point.d_x_rb_m;
        cfg.ris_shape = match self.geometry() {
            Geometry::Ula => RisShape::Ula,
            Geometry::Upa { n_y, n_z } => RisShape::Upa { n_y, n_z },
        };
        cfg.n_scatter_rb = self.system.n_scatter_rb.unwrap_or(cfg.n_scatter_rb);
        if let UserLinkModel::NearField { n_scatter } = &mut cfg.user_link {
            *n_scatter = self.system.n_scatter_ur.unwrap_or(*n_scatter);
        }
        cfg.validate().map_err(|e| {
            CliError::Config(format!("sweep point {} invalid: {e}", point.index))
        })?;
        Ok(cfg)
    }
}
