//! Contact detection between slightly enlarged bodies.

use std::collections::BTreeMap;

use nalgebra::{Point3, Vector3};

use crate::geometry::query::{triangle_aabb, triangle_intersection, triangle_normal, Triangle};
use crate::geometry::{Aabb, MeshBvh, TriangleMesh};

/// Point contact between two bodies. The force `f` acts on `body_b` and
/// `-f` on `body_a`; `normal` points from A into B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub point: Point3<f64>,
    pub normal: Vector3<f64>,
    pub mu: f64,
    pub body_a: usize,
    pub body_b: usize,
}

/// Triangles of one body prepared for contact queries.
#[derive(Debug, Clone)]
pub struct ContactGeometry {
    /// Enlarged triangles used to find overlaps.
    pub(crate) scaled: MeshBvh,
    /// Original triangles, same order as `scaled`.
    pub(crate) raw: Vec<Triangle>,
    /// Unit normals of `raw`, pointing away from the body (into the
    /// container for the container shell).
    pub(crate) normals: Vec<Vector3<f64>>,
    pub(crate) bounds: Aabb,
}

impl ContactGeometry {
    /// `mesh` is in world coordinates; it is enlarged by `scale` about
    /// `center`.
    pub fn new(mesh: &TriangleMesh, center: &Point3<f64>, scale: f64) -> ContactGeometry {
        let raw: Vec<Triangle> = mesh.triangle_iter().collect();
        let scaled: Vec<Triangle> = raw
            .iter()
            .map(|t| t.map(|p| center + (p - center) * scale))
            .collect();
        Self::from_parts(raw, scaled)
    }

    /// Geometry that is used as is, without enlargement.
    pub fn rigid(mesh: &TriangleMesh) -> ContactGeometry {
        let raw: Vec<Triangle> = mesh.triangle_iter().collect();
        Self::from_parts(raw.clone(), raw)
    }

    fn from_parts(raw: Vec<Triangle>, scaled: Vec<Triangle>) -> ContactGeometry {
        let normals = raw
            .iter()
            .map(|t| {
                let n = triangle_normal(t);
                let l = n.norm();
                if l > 0.0 {
                    n / l
                } else {
                    Vector3::zeros()
                }
            })
            .collect();
        let scaled = MeshBvh::from_triangles(scaled);
        let bounds = scaled.aabb().expect("meshes have at least one triangle");
        ContactGeometry {
            scaled,
            raw,
            normals,
            bounds,
        }
    }
}

/// Parameters of contact generation.
#[derive(Debug, Clone, Copy)]
pub struct ContactParams {
    /// Contacts are sampled along intersection segments at this spacing and
    /// merged within voxels of this size.
    pub cluster_grid: f64,
    /// A triangle pair whose original geometry interpenetrates by more than
    /// this along both candidate normals yields no contact.
    pub gap_tol: f64,
}

/// Raw (unclustered) contacts between bodies `a` and `b`.
pub fn pair_contacts(
    a: &ContactGeometry,
    id_a: usize,
    b: &ContactGeometry,
    id_b: usize,
    mu: f64,
    params: &ContactParams,
) -> Vec<Contact> {
    let mut out = Vec::new();
    let Some(region) = a.bounds.intersection(&b.bounds) else {
        return out;
    };
    let mut ia = Vec::new();
    let mut ib = Vec::new();
    a.scaled.overlapping(&region, &mut ia);
    ia.sort_unstable();
    let eps = 1e-12 * a.bounds.extents().amax().max(b.bounds.extents().amax()).max(1.0);
    for &i in &ia {
        let ta = &a.scaled.triangles()[i];
        b.scaled.overlapping(&triangle_aabb(ta), &mut ib);
        ib.sort_unstable();
        for &j in &ib {
            let tb = &b.scaled.triangles()[j];
            let Some((p, q)) = triangle_intersection(ta, tb, eps) else {
                continue;
            };
            let Some(normal) = choose_normal(a, i, b, j, params.gap_tol) else {
                continue;
            };
            let len = (q - p).norm();
            let pieces = (len / params.cluster_grid).ceil().max(1.0) as usize;
            for k in 0..pieces {
                let s = (k as f64 + 0.5) / pieces as f64;
                out.push(Contact {
                    point: p + (q - p) * s,
                    normal,
                    mu,
                    body_a: id_a,
                    body_b: id_b,
                });
            }
        }
    }
    out
}

/// Picks the contact normal from A's face normal and the reverse of B's,
/// whichever separates the original triangles best.
fn choose_normal(a: &ContactGeometry, i: usize, b: &ContactGeometry, j: usize, gap_tol: f64) -> Option<Vector3<f64>> {
    let (ta, tb) = (&a.raw[i], &b.raw[j]);
    let gap = |d: &Vector3<f64>| {
        let lo_b = tb.iter().map(|v| d.dot(&v.coords)).fold(f64::INFINITY, f64::min);
        let hi_a = ta.iter().map(|v| d.dot(&v.coords)).fold(f64::NEG_INFINITY, f64::max);
        lo_b - hi_a
    };
    let mut best: Option<(Vector3<f64>, f64)> = None;
    for d in [a.normals[i], -b.normals[j]] {
        if d == Vector3::zeros() {
            continue;
        }
        let g = gap(&d);
        if best.is_none_or(|(_, bg)| g > bg) {
            best = Some((d, g));
        }
    }
    best.filter(|&(_, g)| g >= -gap_tol).map(|(d, _)| d)
}

/// Merges contacts of the same body pair that fall in the same cubic voxel
/// of side `grid` into one contact at their centroid, with the normalized
/// mean normal.
pub fn cluster_contacts(contacts: &[Contact], grid: f64) -> Vec<Contact> {
    assert!(grid > 0.0, "cluster grid must be positive");
    type Key = (usize, usize, [i64; 3]);
    let mut groups: BTreeMap<Key, (Vector3<f64>, Vector3<f64>, usize, Contact)> = BTreeMap::new();
    for c in contacts {
        let voxel = [0, 1, 2].map(|k| (c.point[k] / grid).floor() as i64);
        let e = groups
            .entry((c.body_a, c.body_b, voxel))
            .or_insert((Vector3::zeros(), Vector3::zeros(), 0, *c));
        e.0 += c.point.coords;
        e.1 += c.normal;
        e.2 += 1;
    }
    groups
        .into_values()
        .map(|(ps, ns, n, first)| {
            let l = ns.norm();
            Contact {
                point: Point3::from(ps / n as f64),
                normal: if l > 1e-9 { ns / l } else { first.normal },
                ..first
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: [f64; 3], a: usize, b: usize) -> Contact {
        Contact {
            point: Point3::from(p),
            normal: Vector3::z(),
            mu: 0.5,
            body_a: a,
            body_b: b,
        }
    }

    #[test]
    fn coincident_contacts_merge() {
        let cs = vec![c([0.003, 0.004, 0.0], 0, 1); 100];
        let out = cluster_contacts(&cs, 0.01);
        assert_eq!(out.len(), 1);
        assert!((out[0].point - Point3::new(0.003, 0.004, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn distant_contacts_stay_apart() {
        let cs = vec![c([0.001, 0.0, 0.0], 0, 1), c([0.021, 0.0, 0.0], 0, 1)];
        assert_eq!(cluster_contacts(&cs, 0.01).len(), 2);
    }

    #[test]
    fn pairs_are_not_merged() {
        let cs = vec![c([0.001, 0.0, 0.0], 0, 1), c([0.002, 0.0, 0.0], 1, 2)];
        assert_eq!(cluster_contacts(&cs, 0.01).len(), 2);
    }

    #[test]
    fn normals_are_averaged() {
        let mut a = c([0.0; 3], 0, 1);
        let mut b = a;
        a.normal = Vector3::x();
        b.normal = Vector3::z();
        let out = cluster_contacts(&[a, b], 0.01);
        let want = Vector3::new(1.0, 0.0, 1.0).normalize();
        assert!((out[0].normal - want).norm() < 1e-12);
    }
}
