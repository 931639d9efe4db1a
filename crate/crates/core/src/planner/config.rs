use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Sampling;
use crate::heuristics::Heuristic;
use crate::manipulation::GripperModel;
use crate::stability::StabilityConfig;

/// Planner parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Heightmap cell size (m).
    pub resolution: f64,
    /// Spacing of candidate X and Y positions (m); rounded to whole cells.
    pub xy_step: f64,
    /// Angular step for yaw and for roll/pitch perturbations (rad).
    pub delta_r: f64,
    /// Search yaw over `[0, 2pi)` instead of `[0, pi)`.
    pub full_yaw_range: bool,
    /// Number of most likely resting orientations searched per item.
    pub top_n: usize,
    /// Ranked candidates checked for stability and reachability; `None`
    /// checks all of them.
    pub candidate_cap: Option<usize>,
    pub heuristic: Heuristic,
    /// Positional weight `c` in the HM and DBLF scores.
    pub c: f64,
    /// Contact tolerance of the MTA score; `None` uses the resolution.
    pub mta_contact_tol: Option<f64>,
    pub check_stability: bool,
    pub check_manipulation: bool,
    pub stability: StabilityConfig,
    pub gripper: GripperModel,
    pub grasp_yaw_steps: usize,
    /// Search every perturbed roll/pitch from the start instead of only
    /// when the resting orientations fail.
    pub force_5d: bool,
    /// Rebuild the container heightmap from all placed meshes after each
    /// placement and log any difference from the incremental update.
    pub debug_reraycast: bool,
    pub sampling: Sampling,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            resolution: 0.002,
            xy_step: 0.01,
            delta_r: PI / 4.0,
            full_yaw_range: false,
            top_n: 4,
            candidate_cap: Some(100),
            heuristic: Heuristic::Hm,
            c: 1.0,
            mta_contact_tol: None,
            check_stability: true,
            check_manipulation: true,
            stability: StabilityConfig::default(),
            gripper: GripperModel::default(),
            grasp_yaw_steps: 8,
            force_5d: false,
            debug_reraycast: false,
            sampling: Sampling::Footprint,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} must be positive, got {v}")))
            }
        };
        pos("resolution", self.resolution)?;
        pos("xy_step", self.xy_step)?;
        pos("delta_r", self.delta_r)?;
        pos("scale factor", self.stability.scale - 1.0)?;
        pos("cluster grid", self.stability.cluster_grid)?;
        pos("density", self.stability.density)?;
        if !(self.stability.mu >= 0.0 && self.stability.mu.is_finite()) {
            return Err(Error::validation("friction coefficient must be non-negative"));
        }
        if !self.c.is_finite() {
            return Err(Error::validation("heuristic constant must be finite"));
        }
        if self.top_n == 0 {
            return Err(Error::validation("top_n must be at least 1"));
        }
        if self.candidate_cap == Some(0) {
            return Err(Error::validation("candidate_cap must be at least 1"));
        }
        if self.stability.cone_sides < 3 {
            return Err(Error::validation("cone_sides must be at least 3"));
        }
        if self.grasp_yaw_steps == 0 {
            return Err(Error::validation("grasp_yaw_steps must be at least 1"));
        }
        if let Some(t) = self.mta_contact_tol {
            pos("mta contact tolerance", t)?;
        }
        self.gripper.check()
    }

    /// Candidate step in heightmap cells.
    pub fn step_cells(&self) -> usize {
        ((self.xy_step / self.resolution).round() as usize).max(1)
    }

    /// Yaw angles searched: `k * delta_r` over `[0, pi)` or `[0, 2pi)`.
    pub fn yaws(&self) -> Vec<f64> {
        let range = if self.full_yaw_range { TAU } else { PI };
        let n = ((range / self.delta_r) - 1e-9).ceil().max(1.0) as usize;
        (0..n).map(|k| k as f64 * self.delta_r).collect()
    }

    /// Roll and pitch offsets `k * delta_r` over `[0, 2pi)`.
    pub fn perturbations(&self) -> Vec<f64> {
        let n = ((TAU / self.delta_r) - 1e-9).ceil().max(1.0) as usize;
        (0..n).map(|k| k as f64 * self.delta_r).collect()
    }

    pub fn mta_tol(&self) -> f64 {
        self.mta_contact_tol.unwrap_or(self.resolution)
    }
}
