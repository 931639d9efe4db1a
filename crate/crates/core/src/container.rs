use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;

/// Open-top box occupying `[0, L] x [0, W] x [0, H]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Container {
    /// Inner dimensions `(L, W, H)` in meters.
    pub dims: [f64; 3],
    /// Friction coefficient against the walls and floor. `None` uses the
    /// global coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_wall: Option<f64>,
}

impl Container {
    pub fn new(length: f64, width: f64, height: f64) -> Result<Container> {
        let c = Container {
            dims: [length, width, height],
            mu_wall: None,
        };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        if self.dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "container dimensions must be positive, got {:?}",
                self.dims
            )))
        }
    }

    pub fn length(&self) -> f64 {
        self.dims[0]
    }

    pub fn width(&self) -> f64 {
        self.dims[1]
    }

    pub fn height(&self) -> f64 {
        self.dims[2]
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn extents(&self) -> Vector3<f64> {
        Vector3::from(self.dims)
    }

    /// True if `p` lies in the box grown by `tol` on every side.
    pub fn contains(&self, p: &Point3<f64>, tol: f64) -> bool {
        (0..3).all(|k| p[k] >= -tol && p[k] <= self.dims[k] + tol)
    }

    /// Smallest signed distance from `p` to the inside of a face; negative
    /// when outside.
    pub fn margin(&self, p: &Point3<f64>) -> f64 {
        (0..3)
            .map(|k| p[k].min(self.dims[k] - p[k]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Floor and four walls as a mesh: one quad (two triangles) each, normals
    /// pointing into the container.
    pub fn shell(&self) -> TriangleMesh {
        let [l, w, h] = self.dims;
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(l, 0.0, 0.0),
            Point3::new(l, w, 0.0),
            Point3::new(0.0, w, 0.0),
            Point3::new(0.0, 0.0, h),
            Point3::new(l, 0.0, h),
            Point3::new(l, w, h),
            Point3::new(0.0, w, h),
        ];
        let triangles = vec![
            [0, 1, 2],
            [0, 2, 3],
            [0, 4, 5],
            [0, 5, 1],
            [1, 5, 6],
            [1, 6, 2],
            [2, 6, 7],
            [2, 7, 3],
            [3, 7, 4],
            [3, 4, 0],
        ];
        TriangleMesh::new(vertices, triangles).expect("static shell topology")
    }

    /// Floor and walls as separate quads, each extended by `margin` past
    /// the container edges, normals inward. Stands in for the shell in
    /// contact detection: an item flush against a wall still sees the full
    /// outline of its footprint on the floor.
    pub fn contact_planes(&self, margin: f64) -> TriangleMesh {
        let [l, w, h] = self.dims;
        let m = margin;
        // (corner, edge u, edge v) with u x v pointing inward.
        let quads = [
            (Point3::new(-m, -m, 0.0), Vector3::new(l + 2.0 * m, 0.0, 0.0), Vector3::new(0.0, w + 2.0 * m, 0.0)),
            (Point3::new(0.0, -m, -m), Vector3::new(0.0, w + 2.0 * m, 0.0), Vector3::new(0.0, 0.0, h + 2.0 * m)),
            (Point3::new(l, -m, -m), Vector3::new(0.0, 0.0, h + 2.0 * m), Vector3::new(0.0, w + 2.0 * m, 0.0)),
            (Point3::new(-m, 0.0, -m), Vector3::new(0.0, 0.0, h + 2.0 * m), Vector3::new(l + 2.0 * m, 0.0, 0.0)),
            (Point3::new(-m, w, -m), Vector3::new(l + 2.0 * m, 0.0, 0.0), Vector3::new(0.0, 0.0, h + 2.0 * m)),
        ];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (o, u, v) in quads {
            let k = vertices.len() as u32;
            vertices.extend([o, o + u, o + u + v, o + v]);
            triangles.extend([[k, k + 1, k + 2], [k, k + 2, k + 3]]);
        }
        TriangleMesh::new(vertices, triangles).expect("static quad topology")
    }
}
