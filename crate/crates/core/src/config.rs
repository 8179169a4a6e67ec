//! Tunable parameters for every pipeline stage, grouped into one JSON-loadable
//! [`RunConfig`]. Missing keys take the defaults below; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    pub voxel: f64,
    pub k_neighbors: usize,
    pub angle_threshold_deg: f64,
    pub dist_threshold: f64,
    pub min_segment_points: usize,
    pub traversable_max_inclination_deg: f64,
    pub ground_max_inclination_deg: f64,
    pub thickness_gap: f64,
    pub gap_threshold: f64,
    /// Horizontal segments narrower than this (smallest box extent) are stair-tread candidates.
    pub max_tread_depth: f64,
    pub min_step_rise: f64,
    pub max_step_rise: f64,
    /// Outward growth of plane boundaries before intersecting them.
    pub expansion_margin: f64,
    pub min_interline_length: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            voxel: 0.05,
            k_neighbors: 20,
            angle_threshold_deg: 10.0,
            dist_threshold: 0.05,
            min_segment_points: 50,
            traversable_max_inclination_deg: 40.0,
            ground_max_inclination_deg: 5.0,
            thickness_gap: 0.1,
            gap_threshold: 0.1,
            max_tread_depth: 0.6,
            min_step_rise: 0.1,
            max_step_rise: 0.25,
            expansion_margin: 0.5,
            min_interline_length: 0.4,
        }
    }
}

impl ExtractionConfig {
    pub fn angle_threshold(&self) -> f64 {
        self.angle_threshold_deg.to_radians()
    }

    pub fn traversable_max_inclination(&self) -> f64 {
        self.traversable_max_inclination_deg.to_radians()
    }

    pub fn ground_max_inclination(&self) -> f64 {
        self.ground_max_inclination_deg.to_radians()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub resolution: f64,
    /// Vertical-plane boundary points farther than this from a plane do not block it.
    pub clearance_height: f64,
    /// A neighbor's points must sit at least this far above a plane to mark Overlap.
    pub overlap_min_height: f64,
    /// Longest run of empty cells along a staircase's ascent axis that is filled as Safe.
    pub stair_gap_cells: usize,
    /// Alpha radius for vertical-plane boundaries; `None` means twice the resolution.
    pub alpha: Option<f64>,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self { resolution: 0.1, clearance_height: 1.0, overlap_min_height: 0.05, stair_gap_cells: 3, alpha: None }
    }
}

impl MappingConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(2.0 * self.resolution)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub projection_max_dist: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { projection_max_dist: 1.5 }
    }
}

/// Monotone piecewise-linear ratio table over inclination in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioTable(pub Vec<(f64, f64)>);

impl RatioTable {
    /// Value at inclination `psi` (radians), clamped to the table ends.
    pub fn eval(&self, psi: f64) -> f64 {
        let deg = psi.to_degrees();
        let pts = &self.0;
        if pts.is_empty() {
            return 1.0;
        }
        if deg <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if deg <= b.0 {
                let t = (deg - a.0) / (b.0 - a.0);
                return a.1 + t * (b.1 - a.1);
            }
        }
        pts[pts.len() - 1].1
    }

    fn validate(&self, name: &str) -> Result<()> {
        let pts = &self.0;
        if pts.is_empty() || pts[0].0 != 0.0 || pts[0].1 != 1.0 {
            return Err(Error::Config(format!("{name} must start at (0, 1)")));
        }
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 > w[0].1 {
                return Err(Error::Config(format!("{name} must be increasing in angle and non-increasing in ratio")));
            }
        }
        if pts.iter().any(|p| p.1 <= 0.0 || p.1 > 1.0) {
            return Err(Error::Config(format!("{name} ratios must lie in (0, 1]")));
        }
        Ok(())
    }
}

/// Kinematic limits of the differential-drive robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotLimits {
    pub v_max: f64,
    pub omega_max: f64,
    /// Largest allowed yaw deviation from the stair ascent axis, radians.
    pub theta_s: f64,
    /// Safety distance to obstacles, meters.
    pub d_s: f64,
    /// Speed ratio when climbing, by inclination.
    pub r_r: RatioTable,
    /// Speed ratio when descending, by inclination.
    pub r_d: RatioTable,
}

impl Default for RobotLimits {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            omega_max: 1.2,
            theta_s: 15f64.to_radians(),
            d_s: 0.2,
            r_r: RatioTable(vec![(0.0, 1.0), (45.0, 0.1)]),
            r_d: RatioTable(vec![(0.0, 1.0), (45.0, 0.4375)]),
        }
    }
}

impl RobotLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0 && self.omega_max > 0.0 && self.theta_s > 0.0 && self.d_s > 0.0) {
            return Err(Error::Config("robot limits must be positive".into()));
        }
        self.r_r.validate("r_r")?;
        self.r_d.validate("r_d")?;
        for i in 0..=450 {
            let psi = (i as f64 * 0.1).to_radians();
            if self.r_d.eval(psi) < self.r_r.eval(psi) - 1e-12 {
                return Err(Error::Config("r_d must not fall below r_r".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Diagonal of the jerk weight matrix, (yaw, arc length).
    pub w_jerk: [f64; 2],
    pub eps_t: f64,
    pub w_vel: f64,
    pub w_mom: f64,
    pub w_orient: f64,
    pub w_safe: f64,
    pub rho0: f64,
    pub rho_gamma: f64,
    pub rho_max: f64,
    pub e_max: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub n_cons: usize,
    pub n_quad: usize,
    pub segment_length: f64,
    pub min_segments_per_plane: usize,
    pub grad_tol: f64,
    /// Largest constraint residual accepted on the dense 1 kHz check.
    pub tol_cons: f64,
    pub check_rate_hz: f64,
    /// Relative tightening of speed limits used inside the penalty terms.
    pub speed_margin: f64,
    pub orient_margin: f64,
    pub safe_margin: f64,
    /// Penalty weight multiplier applied when the dense check fails.
    pub penalty_growth: f64,
    pub max_penalty_rounds: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            w_jerk: [1.0, 1.0],
            eps_t: 32.0,
            w_vel: 1e3,
            w_mom: 1e3,
            w_orient: 1e4,
            w_safe: 1e3,
            rho0: 100.0,
            rho_gamma: 2.0,
            rho_max: 1e5,
            e_max: 0.01,
            max_outer: 30,
            max_inner: 200,
            n_cons: 8,
            n_quad: 16,
            segment_length: 0.5,
            min_segments_per_plane: 2,
            grad_tol: 1e-5,
            tol_cons: 1e-3,
            check_rate_hz: 1000.0,
            speed_margin: 0.03,
            orient_margin: 0.02,
            safe_margin: 0.03,
            penalty_growth: 10.0,
            max_penalty_rounds: 4,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [self.w_jerk[0], self.w_jerk[1], self.eps_t, self.w_vel, self.w_mom, self.w_orient, self.w_safe];
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("optimizer weights must be non-negative".into()));
        }
        if !(self.e_max > 0.0) || !(self.rho_gamma > 1.0) || !(self.rho0 > 0.0) || self.rho_max < self.rho0 {
            return Err(Error::Config("require e_max > 0, rho_gamma > 1 and 0 < rho0 <= rho_max".into()));
        }
        if self.n_cons == 0 || self.n_quad == 0 || self.n_quad % (2 * self.n_cons) != 0 {
            return Err(Error::Config("n_quad must be a positive multiple of 2 * n_cons".into()));
        }
        if self.min_segments_per_plane == 0 || !(self.segment_length > 0.0) {
            return Err(Error::Config("segment sizing must be positive".into()));
        }
        Ok(())
    }
}

/// Every tunable of the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub extraction: ExtractionConfig,
    pub mapping: MappingConfig,
    pub graph: GraphConfig,
    pub robot: RobotLimits,
    pub optimizer: OptimizerConfig,
    pub csv_rate_hz: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            extraction: ExtractionConfig::default(),
            mapping: MappingConfig::default(),
            graph: GraphConfig::default(),
            robot: RobotLimits::default(),
            optimizer: OptimizerConfig::default(),
            csv_rate_hz: 100.0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported config version {}, expected {CONFIG_VERSION}", self.version)));
        }
        let e = &self.extraction;
        if !(e.voxel > 0.0) || e.k_neighbors < 3 || !(e.dist_threshold > 0.0) || !(e.expansion_margin >= 0.0) {
            return Err(Error::Config("require voxel > 0, k_neighbors >= 3, dist_threshold > 0, expansion_margin >= 0".into()));
        }
        if !(self.mapping.resolution > 0.0) || !(self.mapping.alpha() > 0.0) {
            return Err(Error::Config("grid resolution and alpha must be positive".into()));
        }
        if !(self.csv_rate_hz > 0.0) {
            return Err(Error::Config("csv_rate_hz must be positive".into()));
        }
        self.robot.validate()?;
        self.optimizer.validate()
    }
}
