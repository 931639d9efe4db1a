use nalgebra::{Point3, Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;

/// Signed volumes below this magnitude (m³) mark a mesh as not watertight
/// for the purpose of the volume centroid.
const WATERTIGHT_VOLUME_TOL: f64 = 1e-12;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb { min, max }
    }

    /// Smallest box containing every point. Returns `None` for an empty slice.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3<f64>>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let (mut min, mut max) = (first, first);
        for p in it {
            min = min.inf(p);
            max = max.sup(p);
        }
        Some(Aabb { min, max })
    }

    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extents();
        e.x * e.y * e.z
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    /// Boxes overlap or touch after growing each by `margin`.
    pub fn intersects(&self, other: &Aabb, margin: f64) -> bool {
        (0..3).all(|k| {
            self.min[k] - margin <= other.max[k] && other.min[k] - margin <= self.max[k]
        })
    }

    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let min = self.min.sup(&other.min);
        let max = self.max.inf(&other.max);
        (min.x <= max.x && min.y <= max.y && min.z <= max.z).then_some(Aabb { min, max })
    }

    pub fn inflated(&self, margin: f64) -> Aabb {
        let m = Vector3::repeat(margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance_to(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += v * v;
        }
        d2.sqrt()
    }
}

/// Indexed triangle soup. Coordinates are in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, checking that coordinates are finite, indices are in
    /// range and at least one triangle exists.
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::validation("mesh has no triangles"));
        }
        if let Some((i, _)) = vertices
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(Error::validation(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(Error::validation(format!(
                    "triangle {t} references vertex {bad} but mesh has {n} vertices"
                )));
            }
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, i: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_iter(&self) -> impl Iterator<Item = [Point3<f64>; 3]> + '_ {
        (0..self.triangles.len()).map(move |i| self.triangle(i))
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter()).expect("mesh has vertices")
    }

    /// Signed volume enclosed by the surface (positive for outward-facing
    /// counter-clockwise triangles).
    pub fn signed_volume(&self) -> f64 {
        // Tetrahedra are formed against a reference point near the mesh to
        // keep cancellation small for meshes far from the origin.
        let r = self.vertices[0].coords;
        self.triangle_iter()
            .map(|[a, b, c]| (a.coords - r).dot(&(b.coords - r).cross(&(c.coords - r))) / 6.0)
            .sum()
    }

    pub fn surface_area(&self) -> f64 {
        self.triangle_iter()
            .map(|[a, b, c]| 0.5 * (b - a).cross(&(c - a)).norm())
            .sum()
    }

    pub fn is_watertight_volume(&self) -> bool {
        self.signed_volume().abs() > WATERTIGHT_VOLUME_TOL
    }

    /// Uniform-density center of mass.
    ///
    /// Uses the signed tetrahedron decomposition when the enclosed volume is
    /// measurable; otherwise falls back to the area-weighted surface centroid.
    pub fn center_of_mass(&self) -> Point3<f64> {
        let r = self.vertices[0].coords;
        let mut vol = 0.0;
        let mut acc = Vector3::zeros();
        for [a, b, c] in self.triangle_iter() {
            let (a, b, c) = (a.coords - r, b.coords - r, c.coords - r);
            let v = a.dot(&b.cross(&c)) / 6.0;
            vol += v;
            acc += (a + b + c) * (v / 4.0);
        }
        if vol.abs() > WATERTIGHT_VOLUME_TOL {
            return Point3::from(acc / vol + r);
        }
        self.surface_centroid()
    }

    /// Area-weighted centroid of the triangles.
    pub fn surface_centroid(&self) -> Point3<f64> {
        let mut area = 0.0;
        let mut acc = Vector3::zeros();
        for [a, b, c] in self.triangle_iter() {
            let w = 0.5 * (b - a).cross(&(c - a)).norm();
            area += w;
            acc += (a.coords + b.coords + c.coords) * (w / 3.0);
        }
        if area > 0.0 {
            Point3::from(acc / area)
        } else {
            let n = self.vertices.len() as f64;
            Point3::from(self.vertices.iter().map(|v| v.coords).sum::<Vector3<f64>>() / n)
        }
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriangleMesh {
        if t.is_identity() {
            return self.clone();
        }
        let rot = t.rotation();
        let tr = t.translation;
        self.map_vertices(|v| rot * v + tr)
    }

    pub fn rotated(&self, rot: &Rotation3<f64>) -> TriangleMesh {
        self.map_vertices(|v| rot * v)
    }

    pub fn translated(&self, offset: &Vector3<f64>) -> TriangleMesh {
        self.map_vertices(|v| v + offset)
    }

    /// Uniform scaling about `center`.
    pub fn scaled_about(&self, center: &Point3<f64>, factor: f64) -> TriangleMesh {
        self.map_vertices(|v| center + (v - center) * factor)
    }

    fn map_vertices(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Concatenates meshes into one soup, offsetting indices.
    pub fn merge<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> Option<TriangleMesh> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in meshes {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        (!triangles.is_empty()).then_some(TriangleMesh {
            vertices,
            triangles,
        })
    }
}

/// Applies a rigid transform to every vertex; topology is unchanged.
pub fn transform_mesh(mesh: &TriangleMesh, t: &RigidTransform) -> TriangleMesh {
    mesh.transformed(t)
}

/// Axis-aligned box mesh with outward-facing triangles.
pub fn box_mesh(min: Point3<f64>, max: Point3<f64>) -> TriangleMesh {
    let v = |x: bool, y: bool, z: bool| {
        Point3::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    let vertices = vec![
        v(false, false, false),
        v(true, false, false),
        v(true, true, false),
        v(false, true, false),
        v(false, false, true),
        v(true, false, true),
        v(true, true, true),
        v(false, true, true),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh {
        vertices,
        triangles,
    }
}
