//! Heightmap grids and the placement algebra built on them.
//!
//! Cell `(i, j)` covers `[ox + i*r, ox + (i+1)*r) x [oy + j*r, oy + (j+1)*r)`
//! and is stored row-major with `i` along X.

use std::fmt::Write as _;
use std::path::Path;

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::raster::{rasterize, GridSpec, Sampling};
use crate::geometry::{RigidTransform, TriangleMesh};

/// Heights at or below this value count as "no geometry" in a top map.
pub const EMPTY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    origin: [f64; 2],
    resolution: f64,
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl HeightMap {
    pub fn zeros(origin: [f64; 2], resolution: f64, width: usize, height: usize) -> Result<HeightMap> {
        Self::from_data(origin, resolution, width, height, vec![0.0; width * height])
    }

    pub fn from_data(
        origin: [f64; 2],
        resolution: f64,
        width: usize,
        height: usize,
        data: Vec<f64>,
    ) -> Result<HeightMap> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::validation(format!("resolution must be positive, got {resolution}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::validation(format!("empty {width}x{height} heightmap")));
        }
        if data.len() != width * height {
            return Err(Error::validation(format!(
                "{} heights for a {width}x{height} grid",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::validation(format!("heights must be >= 0 or +inf, got {v}")));
        }
        Ok(HeightMap {
            origin,
            resolution,
            width,
            height,
            data,
        })
    }

    /// Builds a map from rows given bottom-up in Y, each row listing X cells.
    pub fn from_rows(resolution: f64, rows: &[Vec<f64>]) -> Result<HeightMap> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::validation("ragged heightmap rows"));
        }
        Self::from_data([0.0, 0.0], resolution, width, height, rows.concat())
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn cell_area(&self) -> f64 {
        self.resolution * self.resolution
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.width + i] = v;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.width..(j + 1) * self.width]
    }

    /// Sum of all finite cells.
    pub fn sum(&self) -> f64 {
        self.data.iter().filter(|v| v.is_finite()).sum()
    }

    pub fn max(&self) -> f64 {
        self.data
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    /// XY center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.resolution,
            self.origin[1] + (j as f64 + 0.5) * self.resolution,
        ]
    }

    /// Errors unless a `w x h` window at `(x, y)` fits inside this map.
    pub fn check_window(&self, x: usize, y: usize, w: usize, h: usize) -> Result<()> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                w,
                h,
                grid_w: self.width,
                grid_h: self.height,
            });
        }
        Ok(())
    }

    /// Raises cells under an object whose top map is `top` placed at window
    /// `(x, y)` with its lowest point at height `z`.
    ///
    /// A cell is skipped when the object has no geometry there: `top` is
    /// (near) zero and, if a bottom map is given, the bottom is infinite.
    pub fn place(
        &mut self,
        top: &HeightMap,
        bottom: Option<&HeightMap>,
        x: usize,
        y: usize,
        z: f64,
    ) -> Result<()> {
        self.check_window(x, y, top.width, top.height)?;
        for j in 0..top.height {
            for i in 0..top.width {
                if is_empty_cell(top, bottom, i, j) {
                    continue;
                }
                let v = top.get(i, j) + z;
                let idx = (y + j) * self.width + x + i;
                if v > self.data[idx] {
                    self.data[idx] = v;
                }
            }
        }
        Ok(())
    }

    /// PGM (P2) rendering. Gray level `g` stands for `g * scale` meters,
    /// where `scale` is stated in a header comment; infinite cells map to the
    /// maximum gray level.
    pub fn to_pgm(&self) -> String {
        const MAXVAL: u32 = 255;
        let top = self.max();
        let scale = if top > 0.0 { top / MAXVAL as f64 } else { 1.0 };
        let mut out = String::new();
        writeln!(out, "P2").unwrap();
        writeln!(out, "# meters per gray level: {scale:e}").unwrap();
        writeln!(out, "# resolution: {} m/cell", self.resolution).unwrap();
        writeln!(out, "{} {}", self.width, self.height).unwrap();
        writeln!(out, "{MAXVAL}").unwrap();
        // Image rows run top to bottom, so emit high Y first.
        for j in (0..self.height).rev() {
            let line: Vec<String> = self
                .row(j)
                .iter()
                .map(|&v| {
                    let g = if v.is_finite() {
                        (v / scale).round().min(MAXVAL as f64) as u32
                    } else {
                        MAXVAL
                    };
                    g.to_string()
                })
                .collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

#[inline]
pub(crate) fn is_empty_cell(top: &HeightMap, bottom: Option<&HeightMap>, i: usize, j: usize) -> bool {
    top.get(i, j) <= EMPTY_EPS && bottom.is_none_or(|b| b.get(i, j).is_infinite())
}

/// Cells along each container axis; partial cells at the far walls are
/// dropped so every cell lies inside the container.
pub fn container_cells(container: &Container, resolution: f64) -> (usize, usize) {
    let n = |d: f64| ((d / resolution) + 1e-9).floor().max(1.0) as usize;
    (n(container.length()), n(container.width()))
}

/// Top-down heightmap of the container floor with `placed` geometry.
pub fn container_heightmap(
    container: &Container,
    placed: &[(TriangleMesh, RigidTransform)],
    resolution: f64,
) -> HeightMap {
    container_heightmap_sampled(container, placed, resolution, Sampling::default())
}

pub fn container_heightmap_sampled(
    container: &Container,
    placed: &[(TriangleMesh, RigidTransform)],
    resolution: f64,
    sampling: Sampling,
) -> HeightMap {
    let (nx, ny) = container_cells(container, resolution);
    let grid = GridSpec {
        origin: [0.0, 0.0],
        resolution,
        nx,
        ny,
    };
    let raster = rasterize(
        placed
            .iter()
            .flat_map(|(m, t)| m.transformed(t).triangle_iter().collect::<Vec<_>>()),
        &grid,
        sampling,
    );
    let data = raster.top.iter().map(|&t| t.max(0.0)).collect();
    HeightMap::from_data([0.0, 0.0], resolution, nx, ny, data).expect("grid dimensions are consistent")
}

/// Lowest height at which an object with bottom map `bottom` fits over
/// `hc` at window `(x, y)`. Cells where the object has no geometry never
/// bind; the result is clamped at the floor.
pub fn lowest_z(hc: &HeightMap, bottom: &HeightMap, x: usize, y: usize) -> Result<f64> {
    hc.check_window(x, y, bottom.width, bottom.height)?;
    Ok(lowest_z_unchecked(hc, bottom, x, y))
}

pub(crate) fn lowest_z_unchecked(hc: &HeightMap, bottom: &HeightMap, x: usize, y: usize) -> f64 {
    let mut z = 0.0f64;
    for j in 0..bottom.height {
        let row_c = &hc.data[(y + j) * hc.width + x..(y + j) * hc.width + x + bottom.width];
        let row_b = bottom.row(j);
        for (c, b) in row_c.iter().zip(row_b) {
            // An infinite bottom gives -inf and never wins.
            let d = c - b;
            if d > z {
                z = d;
            }
        }
    }
    z
}

/// Copy of `hc` with the object placed (see [`HeightMap::place`]). Empty
/// cells are those where `top` is zero.
pub fn update_heightmap(hc: &HeightMap, top: &HeightMap, x: usize, y: usize, z: f64) -> Result<HeightMap> {
    let mut out = hc.clone();
    out.place(top, None, x, y, z)?;
    Ok(out)
}

/// Like [`update_heightmap`], but a zero top height counts as empty only
/// where `bottom` is infinite.
pub fn update_heightmap_masked(
    hc: &HeightMap,
    top: &HeightMap,
    bottom: &HeightMap,
    x: usize,
    y: usize,
    z: f64,
) -> Result<HeightMap> {
    let mut out = hc.clone();
    out.place(top, Some(bottom), x, y, z)?;
    Ok(out)
}
