use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stackpack::heuristics::Heuristic;
use stackpack::items::ItemKind;
use stackpack::SearchConfig;

#[derive(Debug, Parser)]
#[command(name = "stackpack", version, about = "Plan stable, robot-packable placements of irregular items in a box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pack items into the smallest container that takes them all.
    Pack(PackArgs),
    /// Replay a plan and check every intermediate arrangement.
    Validate(ValidateArgs),
    /// Write procedural test meshes.
    GenItems(GenArgs),
    /// Write per-step OBJ scenes and the final heightmap of a plan.
    Export(ExportArgs),
}

/// Where the items come from.
#[derive(Debug, Args)]
pub struct Inputs {
    /// A request JSON file, or mesh files (OBJ, STL, PLY) packed once each.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Containers as JSON, inline or in a file: a list of `[L, W, H]` in
    /// meters or of container objects. Replaces the request's list.
    #[arg(long)]
    pub containers: Option<String>,
    /// Seed for procedural items in the request.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PackArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Plan output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Placement score: hm, dblf or mta.
    #[arg(long)]
    pub heuristic: Option<Heuristic>,
    /// Heightmap cell size (m).
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Candidate position spacing (m).
    #[arg(long)]
    pub xy_step: Option<f64>,
    /// Yaw and tilt step (rad).
    #[arg(long)]
    pub delta_r: Option<f64>,
    /// Resting orientations tried per item.
    #[arg(long)]
    pub top_n_orientations: Option<usize>,
    /// Candidates checked per item; 0 checks all.
    #[arg(long)]
    pub candidate_cap: Option<usize>,
    /// Friction coefficient.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Enlargement used to find contacts.
    #[arg(long)]
    pub scale_factor: Option<f64>,
    /// Skip the static equilibrium check.
    #[arg(long)]
    pub no_stability: bool,
    /// Skip the grasp and insertion check.
    #[arg(long)]
    pub no_manip: bool,
}

impl SearchArgs {
    pub fn apply(&self, c: &mut SearchConfig) {
        if let Some(h) = self.heuristic {
            c.heuristic = h;
        }
        if let Some(v) = self.resolution {
            c.resolution = v;
        }
        if let Some(v) = self.xy_step {
            c.xy_step = v;
        }
        if let Some(v) = self.delta_r {
            c.delta_r = v;
        }
        if let Some(v) = self.top_n_orientations {
            c.top_n = v;
        }
        if let Some(v) = self.candidate_cap {
            c.candidate_cap = (v > 0).then_some(v);
        }
        if let Some(v) = self.mu {
            c.stability.mu = v;
        }
        if let Some(v) = self.scale_factor {
            c.stability.scale = v;
        }
        c.check_stability &= !self.no_stability;
        c.check_manipulation &= !self.no_manip;
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Plan JSON written by `pack`.
    pub plan: PathBuf,
    #[command(flatten)]
    pub inputs: Inputs,
    /// Report output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Item kind; omit with `--order` for a random mix.
    pub kind: Option<ItemKind>,
    /// Bounding box `L W H` (m).
    #[arg(long, num_args = 3, value_names = ["L", "W", "H"])]
    pub size: Option<Vec<f64>>,
    /// Wall or arm thickness (m).
    #[arg(long)]
    pub wall: Option<f64>,
    /// Relative size jitter.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Write this many random items plus a request referencing them.
    #[arg(long)]
    pub order: Option<usize>,
    /// Size range of random items (m).
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [0.04, 0.12])]
    pub size_range: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output OBJ file, or directory with `--order`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub plan: PathBuf,
    #[command(flatten)]
    pub inputs: Inputs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}
