//! Independent step-by-step plan checking against the meshes.
//!
//! Overlap is measured on the meshes themselves, not on heightmaps, so the
//! check does not share the planner's approximations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::query::{triangle_intersection, Triangle};
use crate::geometry::{raycast_heightmaps, Aabb, MeshBvh, RigidTransform, TriangleMesh};
use crate::heightmap::{container_heightmap_sampled, lowest_z};
use crate::manipulation::{always_feasible, grasp_candidates_from_maps, is_manip_feasible, PlacementView};
use crate::plan::PackingPlan;
use crate::planner::{PackItem, SearchConfig};
use crate::stability::ContactScene;

/// Allowed distance outside the container (m).
pub const CONTAINMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Overlap,
    Containment,
    Stability,
    Manipulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub item: usize,
    /// Deepest overlap with any earlier item (m); 0 when separate.
    pub penetration: f64,
    /// Smallest distance from a vertex to the container boundary; negative
    /// when outside.
    pub containment_margin: f64,
    /// `None` when the check is disabled in the plan's configuration.
    pub stable: Option<bool>,
    pub manip_ok: Option<bool>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub steps: Vec<StepReport>,
    pub pass: bool,
    /// First failing step and what failed there.
    pub first_failure: Option<(usize, Violation)>,
    /// Penetration allowed by the check (m).
    pub penetration_tol: f64,
}

/// Replays `plan` and checks every intermediate arrangement for overlap,
/// containment, and, when enabled in `config`, stability and gripper
/// access. All steps are recorded even after a failure.
pub fn validate_plan(
    plan: &PackingPlan,
    items: &[PackItem],
    container: &Container,
    config: &SearchConfig,
) -> Result<ValidationReport> {
    let tol = config.resolution;
    let mut scene = ContactScene::new(container, config.stability);
    let mut placed: Vec<(TriangleMesh, RigidTransform)> = Vec::new();
    let mut bvhs: Vec<MeshBvh> = Vec::new();
    let mut steps = Vec::new();
    let mut first_failure = None;
    for (k, step) in plan.steps.iter().enumerate() {
        let item = items.get(step.item).ok_or_else(|| {
            Error::validation(format!("plan step {k} refers to item {} but only {} were given", step.item, items.len()))
        })?;
        let t = step.rigid_transform();
        let world = item.mesh.transformed(&t);
        let bvh = MeshBvh::new(&world);

        let penetration = bvhs.iter().map(|other| penetration_depth(&bvh, other, 1e-5)).fold(0.0, f64::max);
        let containment_margin = containment_margin(&world, container);

        let stable = if config.check_stability {
            let body = scene.make_body(&item.mesh, &t, item.mass);
            let ok = scene.is_stable_with(&body).unwrap_or_else(|e| {
                log::warn!("step {k}: stability check failed: {e}");
                false
            });
            scene.push(body);
            Some(ok)
        } else {
            None
        };

        let manip_ok = config
            .check_manipulation
            .then(|| manipulation_ok(&item.mesh, &t, &placed, container, config));

        let mut violations = Vec::new();
        if penetration > tol {
            violations.push(Violation::Overlap);
        }
        if containment_margin < -CONTAINMENT_TOL {
            violations.push(Violation::Containment);
        }
        if stable == Some(false) {
            violations.push(Violation::Stability);
        }
        if manip_ok == Some(false) {
            violations.push(Violation::Manipulation);
        }
        if first_failure.is_none() {
            first_failure = violations.first().map(|v| (k, *v));
        }
        steps.push(StepReport {
            step: k,
            item: step.item,
            penetration,
            containment_margin,
            stable,
            manip_ok,
            violations,
        });
        placed.push((item.mesh.clone(), t));
        bvhs.push(bvh);
    }
    Ok(ValidationReport {
        steps,
        pass: first_failure.is_none(),
        first_failure,
        penetration_tol: tol,
    })
}

pub fn containment_margin(world: &TriangleMesh, container: &Container) -> f64 {
    world
        .vertices()
        .iter()
        .map(|p| container.margin(p))
        .fold(f64::INFINITY, f64::min)
}

/// Gripper access re-checked on a container heightmap rebuilt from the
/// meshes. The item is tested at the height the heightmap allows at its
/// cell, or its plan height if that is higher: the plan height may sit
/// slightly lower after exact settling.
fn manipulation_ok(
    mesh: &TriangleMesh,
    t: &RigidTransform,
    placed: &[(TriangleMesh, RigidTransform)],
    container: &Container,
    config: &SearchConfig,
) -> bool {
    let res = config.resolution;
    let hc = container_heightmap_sampled(container, placed, res, config.sampling);
    let rot = t.rotation();
    let maps = raycast_heightmaps(mesh, &rot, res, config.sampling);
    let corner = Point3::from(t.translation) + maps.min_corner.coords;
    if corner.x < -CONTAINMENT_TOL || corner.y < -CONTAINMENT_TOL {
        return false;
    }
    let cell = ((corner.x / res).round() as usize, (corner.y / res).round() as usize);
    let Ok(z_grid) = lowest_z(&hc, &maps.bottom, cell.0, cell.1) else {
        return false;
    };
    let Ok(grasps) = grasp_candidates_from_maps(&maps, &rot, &config.gripper, config.grasp_yaw_steps, res) else {
        return false;
    };
    let view = PlacementView {
        transform: t,
        maps: &maps,
        cell,
        z: corner.z.max(z_grid),
    };
    is_manip_feasible(&view, &hc, &config.gripper, &grasps, &always_feasible)
}

/// Overlap depth of two closed meshes: twice the largest distance from a
/// point inside both to the nearer of the two surfaces. Two boxes
/// overlapping by a slab of thickness `d` give `d`. Zero when the solids do
/// not intersect. Computed to within `tol` by branch and bound.
pub fn penetration_depth(a: &MeshBvh, b: &MeshBvh, tol: f64) -> f64 {
    let (Some(ba), Some(bb)) = (a.aabb(), b.aabb()) else {
        return 0.0;
    };
    let Some(region) = ba.intersection(&bb) else {
        return 0.0;
    };
    if !surfaces_cross(a, b, &region) && !b.contains(&a.triangles()[0][0]) && !a.contains(&b.triangles()[0][0]) {
        return 0.0;
    }
    let f = |p: &Point3<f64>| a.signed_distance(p).min(b.signed_distance(p));
    let mut best = 0.0f64;
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Cell>, best: &mut f64, bx: Aabb| {
        let c = bx.center();
        let v = f(&c);
        *best = best.max(v);
        let bound = v + bx.extents().norm() / 2.0;
        if bound > *best + tol {
            heap.push(Cell { bound, bx });
        }
    };
    push(&mut heap, &mut best, region);
    let mut evals = 0usize;
    while let Some(Cell { bound, bx }) = heap.pop() {
        if bound <= best + tol || evals > 200_000 {
            break;
        }
        let e = bx.extents();
        let axis = if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        };
        let mid = bx.center()[axis];
        let (mut lo_max, mut hi_min) = (bx.max, bx.min);
        lo_max[axis] = mid;
        hi_min[axis] = mid;
        push(&mut heap, &mut best, Aabb::new(bx.min, lo_max));
        push(&mut heap, &mut best, Aabb::new(hi_min, bx.max));
        evals += 2;
    }
    2.0 * best
}

fn surfaces_cross(a: &MeshBvh, b: &MeshBvh, region: &Aabb) -> bool {
    let mut ia = Vec::new();
    let mut ib = Vec::new();
    a.overlapping(region, &mut ia);
    for &i in &ia {
        let ta: &Triangle = &a.triangles()[i];
        let bb = Aabb::from_points(ta.iter()).expect("three points");
        b.overlapping(&bb, &mut ib);
        if ib.iter().any(|&j| triangle_intersection(ta, &b.triangles()[j], 1e-12).is_some()) {
            return true;
        }
    }
    false
}

struct Cell {
    bound: f64,
    bx: Aabb,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.bound == o.bound
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.bound.total_cmp(&o.bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_mesh;

    fn cube_at(x: f64, y: f64, z: f64, s: f64) -> MeshBvh {
        MeshBvh::new(&box_mesh(Point3::new(x, y, z), Point3::new(x + s, y + s, z + s)))
    }

    #[test]
    fn identical_cubes_penetrate_fully() {
        let a = cube_at(0.0, 0.0, 0.0, 1.0);
        let d = penetration_depth(&a, &a.clone(), 1e-5);
        assert!((d - 1.0).abs() < 1e-4, "{d}");
    }

    #[test]
    fn slab_overlap_depth() {
        let a = cube_at(0.0, 0.0, 0.0, 1.0);
        let b = cube_at(0.9, 0.2, 0.1, 1.0);
        let d = penetration_depth(&a, &b, 1e-6);
        assert!((d - 0.1).abs() < 1e-5, "{d}");
    }

    #[test]
    fn touching_and_separate_cubes_do_not_penetrate() {
        let a = cube_at(0.0, 0.0, 0.0, 1.0);
        assert_eq!(penetration_depth(&a, &cube_at(1.0, 0.0, 0.0, 1.0), 1e-6), 0.0);
        assert_eq!(penetration_depth(&a, &cube_at(2.0, 0.0, 0.0, 1.0), 1e-6), 0.0);
    }

    #[test]
    fn nested_cube_is_found_without_surface_crossing() {
        let outer = cube_at(0.0, 0.0, 0.0, 1.0);
        let inner = cube_at(0.4, 0.4, 0.4, 0.2);
        let d = penetration_depth(&outer, &inner, 1e-6);
        assert!((d - 0.2).abs() < 1e-5, "{d}");
    }
}
