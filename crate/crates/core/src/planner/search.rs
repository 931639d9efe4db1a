//! Exhaustive placement search over orientations, yaws and grid positions.

use nalgebra::{Point3, Rotation3};
use rayon::prelude::*;

use crate::container::Container;
use crate::geometry::{raycast_heightmaps, rotation_rpy, ObjectHeightmaps, RigidTransform, TriangleMesh};
use crate::heightmap::{lowest_z_unchecked, HeightMap};
use crate::heuristics::{score_dblf, score_hm_with_sum, score_mta, Heuristic, PlacementCandidate};
use crate::planner::SearchConfig;

/// A roll/pitch pair to search, with every configured yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub roll: f64,
    pub pitch: f64,
}

/// The item at one (roll, pitch, yaw) with its heightmaps.
#[derive(Debug, Clone)]
pub struct OrientedItem {
    pub orientation_index: usize,
    pub yaw_index: usize,
    pub rpy: [f64; 3],
    pub rotation: Rotation3<f64>,
    pub maps: ObjectHeightmaps,
}

impl OrientedItem {
    /// Rigid transform putting the rotated item's bounding-box minimum at
    /// `position`.
    pub fn transform_at(&self, position: &Point3<f64>) -> RigidTransform {
        let [roll, pitch, yaw] = self.rpy;
        RigidTransform::new(roll, pitch, yaw, position - self.maps.min_corner)
    }
}

pub struct SearchOutput {
    pub oriented: Vec<OrientedItem>,
    /// Candidates in generation order: orientation, yaw, x, y.
    pub candidates: Vec<PlacementCandidate>,
}

impl SearchOutput {
    pub fn oriented_for(&self, c: &PlacementCandidate, n_yaws: usize) -> &OrientedItem {
        &self.oriented[c.orientation_index * n_yaws + c.yaw_index]
    }
}

/// Heightmaps of `mesh` at every orientation and configured yaw.
pub fn orient_item(mesh: &TriangleMesh, orientations: &[Orientation], config: &SearchConfig) -> Vec<OrientedItem> {
    let yaws = config.yaws();
    let jobs: Vec<(usize, usize)> = (0..orientations.len())
        .flat_map(|o| (0..yaws.len()).map(move |y| (o, y)))
        .collect();
    jobs.par_iter()
        .map(|&(o, y)| {
            let Orientation { roll, pitch } = orientations[o];
            let yaw = yaws[y];
            let rotation = rotation_rpy(roll, pitch, yaw);
            OrientedItem {
                orientation_index: o,
                yaw_index: y,
                rpy: [roll, pitch, yaw],
                rotation,
                maps: raycast_heightmaps(mesh, &rotation, config.resolution, config.sampling),
            }
        })
        .collect()
}

/// Legal placements of one oriented item over `hc`: every window on the
/// step grid that fits the container footprint, at the lowest
/// collision-free height, kept if the item stays below the container top.
/// Candidates are scored with the configured heuristic.
pub fn candidates_for(
    item: &OrientedItem,
    container: &Container,
    hc: &HeightMap,
    hc_sum: f64,
    config: &SearchConfig,
) -> Vec<PlacementCandidate> {
    let res = config.resolution;
    let step = config.step_cells();
    let (w, h) = (item.maps.width(), item.maps.height());
    let mut out = Vec::new();
    if w > hc.width() || h > hc.height() {
        return out;
    }
    let height = item.maps.extents.z;
    for x in (0..=hc.width() - w).step_by(step) {
        for y in (0..=hc.height() - h).step_by(step) {
            let z = lowest_z_unchecked(hc, &item.maps.bottom, x, y);
            if z + height > container.height() + 1e-9 {
                continue;
            }
            let position = Point3::new(x as f64 * res, y as f64 * res, z);
            let mut c = PlacementCandidate {
                transform: item.transform_at(&position),
                position,
                cell: (x, y),
                score: 0.0,
                orientation_index: item.orientation_index,
                yaw_index: item.yaw_index,
            };
            c.score = match config.heuristic {
                Heuristic::Hm => score_hm_with_sum(hc, hc_sum, &item.maps.top, Some(&item.maps.bottom), &c, config.c),
                Heuristic::Dblf => score_dblf(&position, config.c),
                Heuristic::Mta => score_mta(hc, &item.maps.bottom, &c, z, config.mta_tol()).expect("window fits"),
            };
            out.push(c);
        }
    }
    out
}

/// Runs the search for all orientations, in parallel across oriented
/// items; the output order does not depend on scheduling.
pub fn search(
    mesh: &TriangleMesh,
    container: &Container,
    orientations: &[Orientation],
    hc: &HeightMap,
    config: &SearchConfig,
) -> SearchOutput {
    let oriented = orient_item(mesh, orientations, config);
    let hc_sum = hc.sum();
    let per: Vec<Vec<PlacementCandidate>> = oriented
        .par_iter()
        .map(|o| candidates_for(o, container, hc, hc_sum, config))
        .collect();
    SearchOutput {
        oriented,
        candidates: per.into_iter().flatten().collect(),
    }
}

/// All legal placements of `mesh` over `hc` for the given orientations.
pub fn grid_search_3d(
    mesh: &TriangleMesh,
    container: &Container,
    orientations: &[Orientation],
    hc: &HeightMap,
    config: &SearchConfig,
) -> Vec<PlacementCandidate> {
    search(mesh, container, orientations, hc, config).candidates
}
