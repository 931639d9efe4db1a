//! Pack requests: which items, which boxes to try, and planner settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::load_mesh_auto;
use crate::items::{generate_test_items, ItemKind, ItemParams};
use crate::plan::PackingPlan;
use crate::planner::{pack_all, sequence_items, PackItem, PackOutcome, SearchConfig};

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for unreadable or invalid input.
pub const EXIT_INPUT_ERROR: i32 = 1;
/// Exit status when no container admits a full plan.
pub const EXIT_NO_SOLUTION: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ItemSource {
    /// Mesh file (OBJ, STL or PLY), relative to the request file.
    Mesh { path: PathBuf },
    /// Procedural test item.
    Generated {
        kind: ItemKind,
        #[serde(default)]
        params: ItemParams,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemEntry {
    #[serde(flatten)]
    pub source: ItemSource,
    /// kg; derived from the configured density when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackRequest {
    pub items: Vec<ItemEntry>,
    /// Tried in order of increasing volume.
    pub containers: Vec<Container>,
    #[serde(default)]
    pub config: SearchConfig,
    /// Seed for procedural items.
    #[serde(default)]
    pub seed: u64,
    /// Placement order over the expanded item list; by default items go in
    /// order of decreasing bounding box volume.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<usize>>,
}

impl PackRequest {
    pub fn read(path: impl AsRef<Path>) -> Result<PackRequest> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })
    }

    pub fn check(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::validation("request has no items"));
        }
        if self.containers.is_empty() {
            return Err(Error::validation("request has no containers"));
        }
        for (i, e) in self.items.iter().enumerate() {
            if e.count == 0 {
                return Err(Error::validation(format!("item entry {i} has count 0")));
            }
            if let Some(m) = e.mass {
                if !(m.is_finite() && m > 0.0) {
                    return Err(Error::validation(format!("item entry {i} has mass {m}")));
                }
            }
        }
        for c in &self.containers {
            c.check()?;
        }
        self.config.validate()
    }

    /// Loads or generates every item, one per unit of `count`. Mesh paths
    /// are resolved against `base`.
    pub fn load_items(&self, base: &Path) -> Result<Vec<PackItem>> {
        let mut out = Vec::new();
        for (i, e) in self.items.iter().enumerate() {
            let (name, mesh) = match &e.source {
                ItemSource::Mesh { path } => {
                    let full = base.join(path);
                    (path.display().to_string(), load_mesh_auto(&full)?)
                }
                ItemSource::Generated { kind, params } => {
                    let seed = self.seed.wrapping_add(i as u64);
                    (format!("{kind}-{i}"), generate_test_items(*kind, params, seed)?)
                }
            };
            for _ in 0..e.count {
                out.push(PackItem {
                    name: name.clone(),
                    mesh: mesh.clone(),
                    mass: e.mass,
                });
            }
        }
        Ok(out)
    }
}

/// Why one container was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub container_index: usize,
    /// Item that could not be placed, if the search ran.
    pub failed_item: Option<usize>,
    pub placed: usize,
}

#[derive(Debug, Clone)]
pub enum RunOutcome {
    Packed(PackingPlan),
    NoSolution(Vec<Attempt>),
}

#[derive(Debug, Clone)]
pub struct PackRun {
    pub items: Vec<PackItem>,
    pub outcome: RunOutcome,
}

impl PackRun {
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            RunOutcome::Packed(_) => EXIT_OK,
            RunOutcome::NoSolution(_) => EXIT_NO_SOLUTION,
        }
    }

    pub fn plan(&self) -> Option<&PackingPlan> {
        match &self.outcome {
            RunOutcome::Packed(p) => Some(p),
            RunOutcome::NoSolution(_) => None,
        }
    }
}

/// Loads the request's items and packs them into the first container,
/// smallest first, that takes all of them.
pub fn run_pack(request: &PackRequest, base: &Path) -> Result<PackRun> {
    request.check()?;
    let items = request.load_items(base)?;
    let outcome = pack_into_smallest(&items, &request.containers, request.sequence.as_deref(), &request.config)?;
    Ok(PackRun { items, outcome })
}

/// Tries `containers` in order of increasing volume. Containers smaller in
/// volume than the items themselves are skipped without searching. The
/// plan records the winner's position in `containers`.
pub fn pack_into_smallest(
    items: &[PackItem],
    containers: &[Container],
    sequence: Option<&[usize]>,
    config: &SearchConfig,
) -> Result<RunOutcome> {
    let sequence = match sequence {
        Some(s) => s.to_vec(),
        None => sequence_items(&items.iter().map(|i| i.mesh.clone()).collect::<Vec<_>>()),
    };
    let item_volume: f64 = items.iter().map(|i| i.mesh.signed_volume().abs()).sum();
    let mut order: Vec<usize> = (0..containers.len()).collect();
    order.sort_by(|&a, &b| containers[a].volume().total_cmp(&containers[b].volume()));
    let mut attempts = Vec::new();
    for k in order {
        let c = &containers[k];
        if c.volume() < item_volume {
            log::info!("container {k}: too small for the items' volume");
            attempts.push(Attempt {
                container_index: k,
                failed_item: None,
                placed: 0,
            });
            continue;
        }
        match pack_all(items, c, &sequence, config)? {
            PackOutcome::Packed(mut plan) => {
                log::info!("container {k}: packed {} items", plan.steps.len());
                plan.container_index = Some(k);
                return Ok(RunOutcome::Packed(plan));
            }
            PackOutcome::Failed(f) => {
                log::info!("container {k}: item {} did not fit after {} placements", f.item, f.partial.steps.len());
                attempts.push(Attempt {
                    container_index: k,
                    failed_item: Some(f.item),
                    placed: f.partial.steps.len(),
                });
            }
        }
    }
    Ok(RunOutcome::NoSolution(attempts))
}
