//! Resting orientations of an object dropped on a horizontal plane.
//!
//! Each convex hull facet whose supporting polygon contains the projected
//! center of mass is a stable resting face. Its probability is the solid
//! angle the facet subtends at the center of mass, normalized over the
//! stable facets.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::query::solid_angle;
use crate::geometry::{convex_hull, rotation_rpy, wrap_angle, TriangleMesh};

/// Facets whose normals differ by less than this many radians are merged.
pub const FACET_MERGE_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableOrientation {
    pub roll: f64,
    pub pitch: f64,
    pub probability: f64,
}

struct Facet {
    normal: Vector3<f64>,
    triangles: Vec<[Point3<f64>; 3]>,
}

/// Stable `(roll, pitch)` pairs of `mesh`, most likely first, at most
/// `top_n` of them. Fewer are returned when the hull has fewer stable
/// facets.
pub fn planar_stable_orientations(mesh: &TriangleMesh, top_n: usize) -> Result<Vec<StableOrientation>> {
    let hull = convex_hull(mesh)?;
    let com = mesh.center_of_mass();
    let scale = hull.aabb().extents().amax().max(1e-12);
    let eps = 1e-9 * scale;

    let mut facets: Vec<Facet> = Vec::new();
    let cos_merge = FACET_MERGE_ANGLE.cos();
    for tri in hull.triangle_iter() {
        let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
        match facets.iter_mut().find(|f| f.normal.dot(&n) > cos_merge) {
            Some(f) => f.triangles.push(tri),
            None => facets.push(Facet {
                normal: n,
                triangles: vec![tri],
            }),
        }
    }

    let mut out = Vec::new();
    let mut total = 0.0;
    for f in &facets {
        let omega: f64 = f.triangles.iter().map(|t| solid_angle(&com, t).abs()).sum();
        if !com_over_facet(&com, f, eps) {
            continue;
        }
        total += omega;
        let (roll, pitch) = roll_pitch_for_down(&f.normal);
        out.push(StableOrientation {
            roll,
            pitch,
            probability: omega,
        });
    }
    for o in &mut out {
        o.probability /= total;
    }
    out.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then(a.roll.total_cmp(&b.roll))
            .then(a.pitch.total_cmp(&b.pitch))
    });
    out.truncate(top_n);
    Ok(out)
}

/// True if the projection of `com` along the facet normal falls strictly
/// inside the facet polygon.
fn com_over_facet(com: &Point3<f64>, f: &Facet, eps: f64) -> bool {
    // Boundary edges are those used by exactly one facet triangle.
    let mut edges: Vec<(Point3<f64>, Point3<f64>)> = Vec::new();
    for t in &f.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if let Some(pos) = edges.iter().position(|&(p, q)| p == b && q == a) {
                edges.swap_remove(pos);
            } else {
                edges.push((a, b));
            }
        }
    }
    let p = com - f.normal * f.normal.dot(&(com - f.triangles[0][0]));
    edges
        .iter()
        .all(|(a, b)| (b - a).normalize().cross(&(p - a)).dot(&f.normal) > eps)
}

/// `(roll, pitch)` such that `Ry(roll) Rx(pitch) n = -Z`.
pub fn roll_pitch_for_down(n: &Vector3<f64>) -> (f64, f64) {
    let r = (n.y * n.y + n.z * n.z).sqrt();
    let pitch = if r < 1e-12 { 0.0 } else { (-n.y).atan2(-n.z) };
    let roll = n.x.atan2(r);
    (wrap_angle(roll), wrap_angle(pitch))
}

/// Rotates `mesh` by `(roll, pitch)` and translates it so its lowest point
/// rests on `z = 0`.
pub fn rest_on_floor(mesh: &TriangleMesh, o: &StableOrientation) -> TriangleMesh {
    let rotated = mesh.rotated(&rotation_rpy(o.roll, o.pitch, 0.0));
    let zmin = rotated.aabb().min.z;
    rotated.translated(&Vector3::new(0.0, 0.0, -zmin))
}
