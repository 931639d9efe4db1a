//! Vertical raycasting of triangle meshes onto a uniform XY grid.
//!
//! Two sampling modes are provided. [`Sampling::Footprint`] records, per
//! cell, the extreme heights of all geometry whose vertical projection
//! overlaps the open cell square; this bounds the surface over the whole
//! cell and is what the planner uses. [`Sampling::CellCenter`] casts a
//! single ray through each cell center.

use nalgebra::{Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geometry::TriangleMesh;
use crate::heightmap::HeightMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Footprint,
    CellCenter,
}

/// Grid layout for rasterization: `nx * ny` square cells of side
/// `resolution` starting at `origin`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Number of cells needed to cover `extent` meters.
pub fn cells_for(extent: f64, resolution: f64) -> usize {
    ((extent / resolution) - 1e-9).ceil().max(1.0) as usize
}

/// Per-cell maximum and minimum geometry heights. Cells without geometry
/// hold `-inf` / `+inf`.
pub struct Raster {
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
}

pub fn rasterize(
    triangles: impl IntoIterator<Item = [Point3<f64>; 3]>,
    grid: &GridSpec,
    sampling: Sampling,
) -> Raster {
    let n = grid.nx * grid.ny;
    let mut raster = Raster {
        top: vec![f64::NEG_INFINITY; n],
        bottom: vec![f64::INFINITY; n],
    };
    for tri in triangles {
        match sampling {
            Sampling::Footprint => splat_footprint(&tri, grid, &mut raster),
            Sampling::CellCenter => splat_centers(&tri, grid, &mut raster),
        }
    }
    raster
}

fn cell_range(lo: f64, hi: f64, origin: f64, res: f64, n: usize) -> Option<(usize, usize)> {
    let a = ((lo - origin) / res).floor();
    let b = ((hi - origin) / res).ceil() - 1.0;
    let a = a.max(0.0);
    let b = b.min(n as f64 - 1.0);
    (a <= b).then_some((a as usize, b as usize))
}

fn splat_footprint(tri: &[Point3<f64>; 3], g: &GridSpec, r: &mut Raster) {
    let [a, b, c] = tri;
    let area2 = ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs();
    let res = g.resolution;
    // Vertical faces carry no footprint; their height range is covered by
    // the adjacent non-vertical faces of a closed surface.
    if area2 <= 1e-12 * res * res {
        return;
    }
    let (minx, maxx) = (a.x.min(b.x).min(c.x), a.x.max(b.x).max(c.x));
    let (miny, maxy) = (a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y));
    let Some((i0, i1)) = cell_range(minx, maxx, g.origin[0], res, g.nx) else {
        return;
    };
    let Some((j0, j1)) = cell_range(miny, maxy, g.origin[1], res, g.ny) else {
        return;
    };
    let min_area = 1e-9 * res * res;
    let mut poly = Vec::with_capacity(8);
    let mut scratch = Vec::with_capacity(8);
    for j in j0..=j1 {
        let y0 = g.origin[1] + j as f64 * res;
        for i in i0..=i1 {
            let x0 = g.origin[0] + i as f64 * res;
            poly.clear();
            poly.extend_from_slice(tri);
            clip_axis(&mut poly, &mut scratch, 0, x0, true);
            clip_axis(&mut poly, &mut scratch, 0, x0 + res, false);
            clip_axis(&mut poly, &mut scratch, 1, y0, true);
            clip_axis(&mut poly, &mut scratch, 1, y0 + res, false);
            if poly.len() < 3 || polygon_area_xy(&poly) <= min_area {
                continue;
            }
            let idx = j * g.nx + i;
            for p in &poly {
                r.top[idx] = r.top[idx].max(p.z);
                r.bottom[idx] = r.bottom[idx].min(p.z);
            }
        }
    }
}

/// Sutherland-Hodgman against the half plane `p[axis] >= bound` (when
/// `keep_above`) or `p[axis] <= bound`.
fn clip_axis(
    poly: &mut Vec<Point3<f64>>,
    out: &mut Vec<Point3<f64>>,
    axis: usize,
    bound: f64,
    keep_above: bool,
) {
    if poly.is_empty() {
        return;
    }
    let inside = |p: &Point3<f64>| {
        if keep_above {
            p[axis] >= bound
        } else {
            p[axis] <= bound
        }
    };
    out.clear();
    let n = poly.len();
    for k in 0..n {
        let cur = poly[k];
        let prev = poly[(k + n - 1) % n];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
            let mut p = prev + (cur - prev) * t;
            p[axis] = bound;
            out.push(p);
        }
        if ci {
            out.push(cur);
        }
    }
    std::mem::swap(poly, out);
}

fn polygon_area_xy(poly: &[Point3<f64>]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s.abs()
}

fn splat_centers(tri: &[Point3<f64>; 3], g: &GridSpec, r: &mut Raster) {
    let [a, b, c] = tri;
    let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    let res = g.resolution;
    if det.abs() <= 1e-12 * res * res {
        return;
    }
    let (minx, maxx) = (a.x.min(b.x).min(c.x), a.x.max(b.x).max(c.x));
    let (miny, maxy) = (a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y));
    // Cells whose centers can fall inside the triangle's bounding box.
    let i0 = (((minx - g.origin[0]) / res) - 0.5).ceil().max(0.0);
    let i1 = (((maxx - g.origin[0]) / res) - 0.5).floor().min(g.nx as f64 - 1.0);
    let j0 = (((miny - g.origin[1]) / res) - 0.5).ceil().max(0.0);
    let j1 = (((maxy - g.origin[1]) / res) - 0.5).floor().min(g.ny as f64 - 1.0);
    if i0 > i1 || j0 > j1 {
        return;
    }
    let tol = -1e-12;
    for j in j0 as usize..=j1 as usize {
        let py = g.origin[1] + (j as f64 + 0.5) * res;
        for i in i0 as usize..=i1 as usize {
            let px = g.origin[0] + (i as f64 + 0.5) * res;
            let u = ((b.x - px) * (c.y - py) - (c.x - px) * (b.y - py)) / det;
            let v = ((c.x - px) * (a.y - py) - (a.x - px) * (c.y - py)) / det;
            let w = 1.0 - u - v;
            if u < tol || v < tol || w < tol {
                continue;
            }
            let z = u * a.z + v * b.z + w * c.z;
            let idx = j * g.nx + i;
            r.top[idx] = r.top[idx].max(z);
            r.bottom[idx] = r.bottom[idx].min(z);
        }
    }
}

/// Top-down (`top`) and bottom-up (`bottom`) heightmaps of a mesh at a fixed
/// rotation, both measured from the lowest vertex of the rotated mesh.
#[derive(Debug, Clone)]
pub struct ObjectHeightmaps {
    pub top: HeightMap,
    pub bottom: HeightMap,
    /// Minimum corner of the rotated mesh's bounding box; the grid origin
    /// coincides with its XY part.
    pub min_corner: Point3<f64>,
    pub extents: Vector3<f64>,
}

impl ObjectHeightmaps {
    pub fn width(&self) -> usize {
        self.top.width()
    }

    pub fn height(&self) -> usize {
        self.top.height()
    }
}

/// Raycasts `mesh` rotated by `rotation` onto a grid sized to its XY bounding
/// box. Cells no ray reaches get height 0 in `top` and `+inf` in `bottom`.
pub fn raycast_heightmaps(
    mesh: &TriangleMesh,
    rotation: &Rotation3<f64>,
    resolution: f64,
    sampling: Sampling,
) -> ObjectHeightmaps {
    assert!(resolution > 0.0, "resolution must be positive");
    let rotated = mesh.rotated(rotation);
    let bb = rotated.aabb();
    let ext = bb.extents();
    let grid = GridSpec {
        origin: [bb.min.x, bb.min.y],
        resolution,
        nx: cells_for(ext.x, resolution),
        ny: cells_for(ext.y, resolution),
    };
    let raster = rasterize(rotated.triangle_iter(), &grid, sampling);
    let zmin = bb.min.z;
    let top: Vec<f64> = raster
        .top
        .iter()
        .map(|&t| if t.is_finite() { (t - zmin).max(0.0) } else { 0.0 })
        .collect();
    let bottom: Vec<f64> = raster
        .bottom
        .iter()
        .map(|&b| if b.is_finite() { (b - zmin).max(0.0) } else { f64::INFINITY })
        .collect();
    let origin = [0.0, 0.0];
    ObjectHeightmaps {
        top: HeightMap::from_data(origin, resolution, grid.nx, grid.ny, top)
            .expect("grid dimensions are consistent"),
        bottom: HeightMap::from_data(origin, resolution, grid.nx, grid.ny, bottom)
            .expect("grid dimensions are consistent"),
        min_corner: bb.min,
        extents: ext,
    }
}
