//! Scene snapshots of a plan for viewing outside the planner.

use std::path::{Path, PathBuf};

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::io::to_obj;
use crate::geometry::TriangleMesh;
use crate::heightmap::container_heightmap_sampled;
use crate::plan::PackingPlan;
use crate::planner::PackItem;

/// Writes `step_NNN.obj` for every step, holding the container shell and
/// all items placed so far, then `heightmap.pgm` of the final state. An
/// empty plan produces `container.obj` only. Returns the files written.
pub fn export_scene(plan: &PackingPlan, items: &[PackItem], container: &Container, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let shell = container.shell();
    let write = |name: &str, body: String| -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };
    if plan.steps.is_empty() {
        return Ok(vec![write("container.obj", to_obj([("container", &shell)]))?]);
    }

    let mut placed: Vec<(String, TriangleMesh)> = Vec::new();
    let mut arrangement = Vec::new();
    let mut files = Vec::new();
    for (k, step) in plan.steps.iter().enumerate() {
        let item = items.get(step.item).ok_or_else(|| {
            Error::validation(format!("plan step {k} refers to item {} but only {} were given", step.item, items.len()))
        })?;
        let t = step.rigid_transform();
        placed.push((format!("{k}_{}", item.name), item.mesh.transformed(&t)));
        arrangement.push((item.mesh.clone(), t));
        let groups = std::iter::once(("container", &shell)).chain(placed.iter().map(|(n, m)| (n.as_str(), m)));
        files.push(write(&format!("step_{:03}.obj", k + 1), to_obj(groups))?);
    }
    let hc = container_heightmap_sampled(container, &arrangement, plan.config.resolution, plan.config.sampling);
    let path = dir.join("heightmap.pgm");
    hc.write_pgm(&path)?;
    files.push(path);
    Ok(files)
}
