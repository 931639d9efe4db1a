//! Top-down grasp generation and insertion-path collision checks for a
//! rectangular gripper.
//!
//! The gripper is its rectangular footprint extruded upward without bound.
//! It holds the object at the center of its top surface and descends
//! vertically from above the container rim to the final pose.

use nalgebra::{Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::raster::Sampling;
use crate::geometry::{raycast_heightmaps, ObjectHeightmaps, RigidTransform, TriangleMesh};
use crate::heightmap::{HeightMap, EMPTY_EPS};

const HEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    /// Footprint extent along the gripper's own X axis (meters).
    pub length: f64,
    /// Footprint extent across it (meters).
    pub width: f64,
    /// Extent above the grasp plane. Only informational: the footprint is
    /// checked as an unbounded column.
    pub body_height: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            length: 0.30,
            width: 0.02,
            body_height: 0.30,
        }
    }
}

impl GripperModel {
    pub fn check(&self) -> Result<()> {
        if [self.length, self.width, self.body_height].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::validation("gripper dimensions must be positive"))
        }
    }

    /// Footprint corners, counterclockwise, centered at `(cx, cy)` and
    /// rotated by `yaw`.
    pub fn footprint(&self, cx: f64, cy: f64, yaw: f64) -> [[f64; 2]; 4] {
        let (s, c) = yaw.sin_cos();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)].map(|(u, v)| [cx + c * u - s * v, cy + s * u + c * v])
    }
}

/// A top-down grasp. The approach direction is always `-Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspCandidate {
    /// Grasp point in the item's own mesh frame.
    pub point: Point3<f64>,
    /// Grasp point relative to the minimum corner of the rotated item's
    /// bounding box.
    pub offset: Vector3<f64>,
    /// Gripper yaw about world Z.
    pub yaw: f64,
    pub yaw_index: usize,
    /// Gripper footprint area outside the item's footprint (m^2).
    pub overhang: f64,
    /// Smallest distance from a gripper corner to the edge of the item's
    /// footprint bounding box; negative when a corner sticks out.
    pub clearance: f64,
}

impl GraspCandidate {
    /// End-effector pose for an item placed by `t`: translation at the grasp
    /// point, yaw about Z.
    pub fn pose(&self, t: &RigidTransform) -> RigidTransform {
        RigidTransform::new(0.0, 0.0, self.yaw, t.apply(&self.point).coords)
    }
}

/// Grasps of `mesh` at the orientation of `t`, one per gripper yaw
/// `k * 2pi / yaw_steps`, least overhang first.
pub fn grasp_candidates(
    mesh: &TriangleMesh,
    t: &RigidTransform,
    gripper: &GripperModel,
    yaw_steps: usize,
    resolution: f64,
) -> Result<Vec<GraspCandidate>> {
    let rot = t.rotation();
    let maps = raycast_heightmaps(mesh, &rot, resolution, Sampling::Footprint);
    grasp_candidates_from_maps(&maps, &rot, gripper, yaw_steps, resolution)
}

/// [`grasp_candidates`] from precomputed heightmaps of the rotated item.
/// Top-surface cells are those within `contact_tol` of the highest one.
pub fn grasp_candidates_from_maps(
    maps: &ObjectHeightmaps,
    rotation: &Rotation3<f64>,
    gripper: &GripperModel,
    yaw_steps: usize,
    contact_tol: f64,
) -> Result<Vec<GraspCandidate>> {
    if yaw_steps == 0 {
        return Err(Error::validation("yaw_steps must be at least 1"));
    }
    let top = &maps.top;
    let occupied = |i: usize, j: usize| !crate::heightmap::is_empty_cell(top, Some(&maps.bottom), i, j);
    let mut hmax = f64::NEG_INFINITY;
    for j in 0..top.height() {
        for i in 0..top.width() {
            if occupied(i, j) {
                hmax = hmax.max(top.get(i, j));
            }
        }
    }
    if !hmax.is_finite() {
        return Err(Error::NoGrasp("item has no top surface".into()));
    }
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for j in 0..top.height() {
        for i in 0..top.width() {
            if occupied(i, j) && top.get(i, j) >= hmax - contact_tol {
                let [cx, cy] = top.cell_center(i, j);
                sx += cx;
                sy += cy;
                n += 1;
            }
        }
    }
    let (gx, gy) = (sx / n as f64, sy / n as f64);
    let offset = Vector3::new(gx, gy, hmax.max(EMPTY_EPS));
    let point = rotation.inverse() * (maps.min_corner + offset);

    let res = top.resolution();
    let (fw, fh) = (maps.extents.x, maps.extents.y);
    let mut out: Vec<GraspCandidate> = (0..yaw_steps)
        .map(|k| {
            let yaw = std::f64::consts::TAU * k as f64 / yaw_steps as f64;
            let rect = gripper.footprint(gx, gy, yaw);
            let mut covered = 0.0;
            for_each_cell_under(&rect, top.width(), top.height(), res, |i, j, a| {
                if occupied(i, j) {
                    covered += a;
                }
            });
            let overhang = (gripper.length * gripper.width - covered).max(0.0);
            let clearance = rect
                .iter()
                .map(|p| p[0].min(fw - p[0]).min(p[1]).min(fh - p[1]))
                .fold(f64::INFINITY, f64::min);
            GraspCandidate {
                point,
                offset,
                yaw,
                yaw_index: k,
                overhang,
                clearance,
            }
        })
        .collect();
    let quant = 1e-12;
    out.sort_by(|a, b| {
        let (oa, ob) = ((a.overhang / quant).round(), (b.overhang / quant).round());
        oa.total_cmp(&ob)
            .then(((b.clearance / quant).round()).total_cmp(&(a.clearance / quant).round()))
            .then(a.yaw_index.cmp(&b.yaw_index))
    });
    Ok(out)
}

/// Calls `f(i, j, area)` for every cell of a `w x h` grid (origin 0, cell
/// size `res`) that overlaps the convex polygon `poly` with positive area.
pub(crate) fn for_each_cell_under(
    poly: &[[f64; 2]],
    w: usize,
    h: usize,
    res: f64,
    mut f: impl FnMut(usize, usize, f64),
) {
    let minx = poly.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let maxx = poly.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let miny = poly.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let maxy = poly.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let lo = |v: f64| (v / res).floor().max(0.0) as usize;
    let hi = |v: f64, n: usize| ((v / res).ceil().max(0.0) as usize).min(n);
    let min_area = 1e-9 * res * res;
    let mut buf = Vec::with_capacity(8);
    let mut scratch = Vec::with_capacity(8);
    for j in lo(miny)..hi(maxy, h) {
        for i in lo(minx)..hi(maxx, w) {
            let (x0, y0) = (i as f64 * res, j as f64 * res);
            buf.clear();
            buf.extend_from_slice(poly);
            clip(&mut buf, &mut scratch, 0, x0, true);
            clip(&mut buf, &mut scratch, 0, x0 + res, false);
            clip(&mut buf, &mut scratch, 1, y0, true);
            clip(&mut buf, &mut scratch, 1, y0 + res, false);
            let a = area(&buf);
            if a > min_area {
                f(i, j, a);
            }
        }
    }
}

fn clip(poly: &mut Vec<[f64; 2]>, out: &mut Vec<[f64; 2]>, axis: usize, bound: f64, keep_above: bool) {
    if poly.is_empty() {
        return;
    }
    let inside = |p: &[f64; 2]| if keep_above { p[axis] >= bound } else { p[axis] <= bound };
    out.clear();
    let n = poly.len();
    for k in 0..n {
        let cur = poly[k];
        let prev = poly[(k + n - 1) % n];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
            let mut p = [prev[0] + (cur[0] - prev[0]) * t, prev[1] + (cur[1] - prev[1]) * t];
            p[axis] = bound;
            out.push(p);
        }
        if ci {
            out.push(cur);
        }
    }
    std::mem::swap(poly, out);
}

fn area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s.abs()
}

/// Robot-specific acceptance test for a grasp at a given item pose
/// (inverse kinematics, joint limits, arm collisions).
pub type ExternalCheck<'a> = &'a (dyn Fn(&GraspCandidate, &RigidTransform) -> bool + Sync);

pub fn always_feasible(_: &GraspCandidate, _: &RigidTransform) -> bool {
    true
}

/// An item about to be placed: its transform, its heightmaps at that
/// rotation, and the container window it lands in.
#[derive(Debug, Clone, Copy)]
pub struct PlacementView<'a> {
    pub transform: &'a RigidTransform,
    pub maps: &'a ObjectHeightmaps,
    pub cell: (usize, usize),
    /// Height of the item's lowest point.
    pub z: f64,
}

/// True if some grasp lets the gripper carry the item straight down to its
/// pose without the gripper column or the item touching the terrain `hc`.
pub fn is_manip_feasible(
    placement: &PlacementView<'_>,
    hc: &HeightMap,
    gripper: &GripperModel,
    grasps: &[GraspCandidate],
    external_check: ExternalCheck<'_>,
) -> bool {
    if !item_path_clear(placement, hc) {
        return false;
    }
    let res = hc.resolution();
    let (x, y) = placement.cell;
    let (ox, oy) = (x as f64 * res, y as f64 * res);
    grasps.iter().any(|g| {
        let plane = placement.z + g.offset.z;
        let rect = gripper.footprint(ox + g.offset.x, oy + g.offset.y, g.yaw);
        let mut clear = true;
        for_each_cell_under(&rect, hc.width(), hc.height(), res, |i, j, _| {
            if hc.get(i, j) > plane + HEIGHT_EPS {
                clear = false;
            }
        });
        clear && external_check(g, placement.transform)
    })
}

/// Terrain under the item must stay below the item's bottom surface.
fn item_path_clear(p: &PlacementView<'_>, hc: &HeightMap) -> bool {
    let (x, y) = p.cell;
    let b = &p.maps.bottom;
    if hc.check_window(x, y, b.width(), b.height()).is_err() {
        return false;
    }
    for j in 0..b.height() {
        for i in 0..b.width() {
            let hb = b.get(i, j);
            if hb.is_finite() && hc.get(x + i, y + j) > p.z + hb + HEIGHT_EPS {
                return false;
            }
        }
    }
    true
}
