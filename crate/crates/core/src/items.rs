//! Procedural test items: boxes, L-shapes, bowls and wedges.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{box_mesh, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Box,
    LShape,
    /// Tapered bowl with a flat bottom, revolved about Z.
    Bowl,
    /// Right-triangular prism rising along X.
    Wedge,
}

impl ItemKind {
    pub const ALL: [ItemKind; 4] = [ItemKind::Box, ItemKind::LShape, ItemKind::Bowl, ItemKind::Wedge];
}

impl FromStr for ItemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "box" => Ok(ItemKind::Box),
            "lshape" => Ok(ItemKind::LShape),
            "bowl" => Ok(ItemKind::Bowl),
            "wedge" => Ok(ItemKind::Wedge),
            _ => Err(Error::validation(format!("unknown item kind {s:?}, expected box, lshape, bowl or wedge"))),
        }
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItemKind::Box => "box",
            ItemKind::LShape => "lshape",
            ItemKind::Bowl => "bowl",
            ItemKind::Wedge => "wedge",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ItemParams {
    /// Bounding box (m). A bowl uses `size[0]` as its rim diameter and
    /// ignores `size[1]`.
    pub size: [f64; 3],
    /// Arm thickness of an L-shape, or wall thickness of a bowl. Defaults
    /// to 40% of the smaller L dimension, or 10% of the bowl radius.
    pub wall: Option<f64>,
    /// Bottom radius of a bowl as a fraction of its rim radius.
    pub taper: f64,
    /// Each dimension is scaled by a seeded factor in `[1 - jitter, 1 + jitter]`.
    pub jitter: f64,
    /// Angular segments of a bowl.
    pub segments: usize,
}

impl Default for ItemParams {
    fn default() -> Self {
        ItemParams {
            size: [0.1, 0.1, 0.1],
            wall: None,
            taper: 0.6,
            jitter: 0.0,
            segments: 32,
        }
    }
}

impl ItemParams {
    pub fn sized(x: f64, y: f64, z: f64) -> ItemParams {
        ItemParams {
            size: [x, y, z],
            ..Default::default()
        }
    }
}

/// Builds an item mesh. The mesh is centered on the Z axis with its base at
/// `z = 0`. Identical arguments give identical meshes.
pub fn generate_test_items(kind: ItemKind, params: &ItemParams, seed: u64) -> Result<TriangleMesh> {
    let mut p = *params;
    if !(p.jitter >= 0.0 && p.jitter < 1.0) {
        return Err(Error::validation("jitter must be in [0, 1)"));
    }
    if p.jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut p.size {
            *s *= 1.0 + rng.random_range(-p.jitter..=p.jitter);
        }
    }
    if !p.size.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::validation(format!("item size must be positive, got {:?}", p.size)));
    }
    let [x, y, z] = p.size;
    match kind {
        ItemKind::Box => Ok(box_mesh(Point3::new(-x / 2.0, -y / 2.0, 0.0), Point3::new(x / 2.0, y / 2.0, z))),
        ItemKind::LShape => {
            let t = p.wall.unwrap_or(0.4 * x.min(z));
            if !(t > 0.0 && t < x && t < z) {
                return Err(Error::validation("L-shape arm thickness must be positive and below its width and height"));
            }
            let (a, b) = (-x / 2.0, x / 2.0);
            let profile = [(a, 0.0), (b, 0.0), (b, t), (a + t, t), (a + t, z), (a, z)];
            // Fan from the reflex corner.
            let caps = [[3, 4, 5], [3, 5, 0], [3, 0, 1], [3, 1, 2]];
            extrude_xz(&profile, &caps, y)
        }
        ItemKind::Wedge => {
            let profile = [(-x / 2.0, 0.0), (x / 2.0, 0.0), (x / 2.0, z)];
            extrude_xz(&profile, &[[0, 1, 2]], y)
        }
        ItemKind::Bowl => {
            let r = x / 2.0;
            let w = p.wall.unwrap_or(0.1 * r);
            let rb = p.taper * r;
            if !(p.taper > 0.0 && p.taper <= 1.0) {
                return Err(Error::validation("bowl taper must be in (0, 1]"));
            }
            // Inner wall parallel to the outer one, shifted inward by `w`.
            let inner_bottom = rb + (r - rb) * w / z - w;
            if !(w > 0.0 && w < z && inner_bottom > 0.0) {
                return Err(Error::validation("bowl wall is too thick for its size"));
            }
            if p.segments < 3 {
                return Err(Error::validation("bowl needs at least 3 segments"));
            }
            let profile = [(0.0, 0.0), (rb, 0.0), (r, z), (r - w, z), (inner_bottom, w), (0.0, w)];
            revolve(&profile, p.segments)
        }
    }
}

/// Kind and parameters of `n` random items with dimensions in
/// `[min_size, max_size]`, reproducible from `seed`.
pub fn procedural_order(n: usize, seed: u64, min_size: f64, max_size: f64) -> Vec<(ItemKind, ItemParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let kind = ItemKind::ALL[rng.random_range(0..ItemKind::ALL.len())];
            let mut dim = || rng.random_range(min_size..=max_size);
            let mut size = [dim(), dim(), dim()];
            if kind == ItemKind::Bowl {
                // Bowls are wider than they are tall.
                size[2] = size[2].min(0.6 * size[0]);
            }
            (kind, ItemParams::sized(size[0], size[1], size[2]))
        })
        .collect()
}

/// Extrudes a counterclockwise XZ profile along Y, centered on `y = 0`.
/// `caps` triangulates the profile.
fn extrude_xz(profile: &[(f64, f64)], caps: &[[usize; 3]], depth: f64) -> Result<TriangleMesh> {
    let n = profile.len();
    let h = depth / 2.0;
    let mut v: Vec<Point3<f64>> = profile.iter().map(|&(x, z)| Point3::new(x, -h, z)).collect();
    v.extend(profile.iter().map(|&(x, z)| Point3::new(x, h, z)));
    let mut t: Vec<[u32; 3]> = Vec::new();
    for c in caps {
        t.push([c[0] as u32, c[2] as u32, c[1] as u32]);
        t.push([(c[0] + n) as u32, (c[1] + n) as u32, (c[2] + n) as u32]);
    }
    for k in 0..n {
        let (a, b) = (k as u32, ((k + 1) % n) as u32);
        let m = n as u32;
        t.push([a, b, b + m]);
        t.push([a, b + m, a + m]);
    }
    outward(TriangleMesh::new(v, t)?)
}

/// Revolves an `(r, z)` profile about Z. The first and last points must lie
/// on the axis.
fn revolve(profile: &[(f64, f64)], segments: usize) -> Result<TriangleMesh> {
    let mut v = Vec::new();
    // Vertex index of each profile point at each segment.
    let mut idx: Vec<Vec<u32>> = Vec::new();
    for &(r, z) in profile {
        if r == 0.0 {
            v.push(Point3::new(0.0, 0.0, z));
            idx.push(vec![(v.len() - 1) as u32; segments]);
        } else {
            let start = v.len() as u32;
            for s in 0..segments {
                let a = TAU * s as f64 / segments as f64;
                v.push(Point3::new(r * a.cos(), r * a.sin(), z));
            }
            idx.push((0..segments as u32).map(|s| start + s).collect());
        }
    }
    let mut t = Vec::new();
    for k in 0..profile.len() - 1 {
        let (p, q) = (&idx[k], &idx[k + 1]);
        for s in 0..segments {
            let s1 = (s + 1) % segments;
            if p[s] != p[s1] {
                t.push([p[s], p[s1], q[s1]]);
            }
            if q[s] != q[s1] {
                t.push([p[s], q[s1], q[s]]);
            }
        }
    }
    outward(TriangleMesh::new(v, t)?)
}

fn outward(mesh: TriangleMesh) -> Result<TriangleMesh> {
    if mesh.signed_volume() >= 0.0 {
        return Ok(mesh);
    }
    let t = mesh.triangles().iter().map(|&[a, b, c]| [a, c, b]).collect();
    TriangleMesh::new(mesh.vertices().to_vec(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{raycast_heightmaps, Sampling};
    use nalgebra::Rotation3;

    #[test]
    fn unit_box_has_twelve_triangles() {
        let m = generate_test_items(ItemKind::Box, &ItemParams::sized(1.0, 1.0, 1.0), 0).unwrap();
        assert_eq!(m.triangles().len(), 12);
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volumes_match_closed_forms() {
        let l = generate_test_items(
            ItemKind::LShape,
            &ItemParams {
                wall: Some(0.2),
                ..ItemParams::sized(1.0, 0.5, 1.0)
            },
            0,
        )
        .unwrap();
        assert!((l.signed_volume() - (1.0 * 0.2 + 0.2 * 0.8) * 0.5).abs() < 1e-12);
        assert!(l.is_watertight_volume());
        let w = generate_test_items(ItemKind::Wedge, &ItemParams::sized(1.0, 2.0, 0.5), 0).unwrap();
        assert!((w.signed_volume() - 0.5).abs() < 1e-12);
        assert!(w.is_watertight_volume());
    }

    #[test]
    fn bowl_is_closed_and_hollow() {
        let p = ItemParams {
            wall: Some(0.02),
            segments: 48,
            ..ItemParams::sized(0.2, 0.2, 0.05)
        };
        let m = generate_test_items(ItemKind::Bowl, &p, 0).unwrap();
        assert!(m.is_watertight_volume());
        assert!(m.signed_volume() > 0.0);
        let maps = raycast_heightmaps(&m, &Rotation3::identity(), 0.005, Sampling::CellCenter);
        let (w, h) = (maps.top.width(), maps.top.height());
        let center = maps.top.get(w / 2, h / 2);
        assert!((center - 0.02).abs() < 1e-9, "{center}");
        assert!(maps.top.max() > 0.049);
    }

    #[test]
    fn same_seed_same_mesh() {
        let p = ItemParams {
            jitter: 0.2,
            ..ItemParams::sized(0.1, 0.05, 0.08)
        };
        for kind in ItemKind::ALL {
            let a = generate_test_items(kind, &p, 7).unwrap();
            let b = generate_test_items(kind, &p, 7).unwrap();
            assert_eq!(a, b);
            let c = generate_test_items(kind, &p, 8).unwrap();
            assert_ne!(a.vertices(), c.vertices());
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_test_items(ItemKind::Box, &ItemParams::sized(0.0, 1.0, 1.0), 0).is_err());
        let thick = ItemParams {
            wall: Some(0.09),
            ..ItemParams::sized(0.2, 0.2, 0.05)
        };
        assert!(generate_test_items(ItemKind::Bowl, &thick, 0).is_err());
    }

    #[test]
    fn procedural_order_is_reproducible() {
        assert_eq!(procedural_order(5, 3, 0.03, 0.1), procedural_order(5, 3, 0.03, 0.1));
        assert_ne!(procedural_order(5, 3, 0.03, 0.1), procedural_order(5, 4, 0.03, 0.1));
    }
}
