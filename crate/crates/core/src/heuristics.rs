//! Placement scores. Lower is better for every heuristic.

use std::fmt;
use std::str::FromStr;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::heightmap::{is_empty_cell, HeightMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// Total heightmap volume after placement plus a positional bias.
    #[default]
    Hm,
    /// Deepest-bottom-left-first: `Z + c (X + Y)`.
    Dblf,
    /// Negated contact area between the object bottom and the terrain.
    Mta,
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hm" => Ok(Heuristic::Hm),
            "dblf" => Ok(Heuristic::Dblf),
            "mta" => Ok(Heuristic::Mta),
            _ => Err(Error::validation(format!("unknown heuristic {s:?}, expected hm, dblf or mta"))),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Hm => "hm",
            Heuristic::Dblf => "dblf",
            Heuristic::Mta => "mta",
        })
    }
}

/// A legal placement found by the grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementCandidate {
    /// Rigid transform taking the item's mesh frame to the container.
    pub transform: RigidTransform,
    /// World position of the minimum corner of the placed item's bounding
    /// box: `X = x * resolution`, `Y = y * resolution`, `Z` from the
    /// heightmap.
    pub position: Point3<f64>,
    /// Window origin in container heightmap cells.
    pub cell: (usize, usize),
    pub score: f64,
    pub orientation_index: usize,
    pub yaw_index: usize,
}

pub fn score_dblf(position: &Point3<f64>, c: f64) -> f64 {
    position.z + c * (position.x + position.y)
}

/// Increase of the heightmap sum when the object is placed at `(x, y, z)`.
/// The window must fit in `hc`.
pub fn hm_window_delta(hc: &HeightMap, top: &HeightMap, bottom: Option<&HeightMap>, x: usize, y: usize, z: f64) -> f64 {
    let mut delta = 0.0;
    for j in 0..top.height() {
        let row = hc.row(y + j);
        for i in 0..top.width() {
            if is_empty_cell(top, bottom, i, j) {
                continue;
            }
            let v = top.get(i, j) + z;
            let c = row[x + i];
            if v > c {
                delta += v - c;
            }
        }
    }
    delta
}

/// `c (X + Y)` plus the sum of the container heightmap after placing the
/// object. `hc` is not modified.
pub fn score_hm(hc: &HeightMap, top: &HeightMap, bottom: Option<&HeightMap>, candidate: &PlacementCandidate, c: f64) -> Result<f64> {
    let (x, y) = candidate.cell;
    hc.check_window(x, y, top.width(), top.height())?;
    Ok(score_hm_with_sum(hc, hc.sum(), top, bottom, candidate, c))
}

/// [`score_hm`] with a precomputed `hc.sum()`.
pub(crate) fn score_hm_with_sum(
    hc: &HeightMap,
    base_sum: f64,
    top: &HeightMap,
    bottom: Option<&HeightMap>,
    candidate: &PlacementCandidate,
    c: f64,
) -> f64 {
    let p = &candidate.position;
    let (x, y) = candidate.cell;
    c * (p.x + p.y) + base_sum + hm_window_delta(hc, top, bottom, x, y, p.z)
}

/// Negated area of cells where the object's bottom lies within
/// `contact_tol` of the terrain.
pub fn score_mta(hc: &HeightMap, bottom: &HeightMap, candidate: &PlacementCandidate, z: f64, contact_tol: f64) -> Result<f64> {
    let (x, y) = candidate.cell;
    hc.check_window(x, y, bottom.width(), bottom.height())?;
    let mut count = 0usize;
    for j in 0..bottom.height() {
        let row = hc.row(y + j);
        for i in 0..bottom.width() {
            let b = bottom.get(i, j);
            if b.is_finite() && (row[x + i] - (z + b)).abs() <= contact_tol {
                count += 1;
            }
        }
    }
    Ok(-(count as f64) * hc.cell_area())
}

/// Indices of `candidates` in ranking order: ascending score, then
/// `(orientation_index, yaw_index, x, y)`. The sort is stable.
pub fn rank_candidates(candidates: &[PlacementCandidate], scores: &[f64]) -> Vec<usize> {
    assert_eq!(candidates.len(), scores.len(), "one score per candidate");
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&candidates[a], &candidates[b]);
        scores[a]
            .total_cmp(&scores[b])
            .then(ca.orientation_index.cmp(&cb.orientation_index))
            .then(ca.yaw_index.cmp(&cb.yaw_index))
            .then(ca.cell.cmp(&cb.cell))
    });
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cand(x: usize, y: usize, z: f64, res: f64) -> PlacementCandidate {
        PlacementCandidate {
            transform: RigidTransform::identity(),
            position: Point3::new(x as f64 * res, y as f64 * res, z),
            cell: (x, y),
            score: 0.0,
            orientation_index: 0,
            yaw_index: 0,
        }
    }

    fn map(rows: &[&[f64]]) -> HeightMap {
        HeightMap::from_rows(1.0, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn dblf_values() {
        assert!((score_dblf(&Point3::new(0.1, 0.1, 0.2), 1.0) - 0.4).abs() < 1e-15);
        assert_eq!(score_dblf(&Point3::origin(), 1.0), 0.0);
        let a = score_dblf(&Point3::new(0.1, 0.0, 0.3), 1.0);
        let b = score_dblf(&Point3::new(0.2, 0.1, 0.3), 1.0);
        assert!(a < b);
    }

    #[test]
    fn hm_single_cell() {
        let hc = map(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let top = map(&[&[0.05]]);
        let s = score_hm(&hc, &top, None, &cand(0, 0, 0.0, 1.0), 0.0).unwrap();
        assert!((s - 0.05).abs() < 1e-15);
        let s0 = score_hm(&hc, &top, None, &cand(0, 0, 0.0, 1.0), 1.0).unwrap();
        let s1 = score_hm(&hc, &top, None, &cand(1, 1, 0.0, 1.0), 1.0).unwrap();
        assert!((s1 - s0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hm_matches_updated_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let data: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..1.0)).collect();
            let hc = HeightMap::from_data([0.0, 0.0], 0.1, 6, 5, data).unwrap();
            let top: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
            let top = HeightMap::from_data([0.0, 0.0], 0.1, 3, 2, top).unwrap();
            let (x, y) = (rng.random_range(0..4), rng.random_range(0..4));
            let z = rng.random_range(0.0..1.0);
            let updated = crate::heightmap::update_heightmap(&hc, &top, x, y, z).unwrap();
            let s = score_hm(&hc, &top, None, &cand(x, y, z, 0.1), 0.0).unwrap();
            assert!((s - updated.sum()).abs() < 1e-9);
        }
    }

    #[test]
    fn mta_examples() {
        let floor = map(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let flat = map(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(score_mta(&floor, &flat, &cand(0, 0, 0.0, 1.0), 0.0, 0.002).unwrap(), -4.0);

        // Step: high side (x = 1) at 0.1, low side at 0.
        let step = map(&[&[0.0, 0.1, 0.1], &[0.0, 0.1, 0.1]]);
        let bottom = map(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(score_mta(&step, &bottom, &cand(0, 0, 0.1, 1.0), 0.1, 0.002).unwrap(), -2.0);
        assert_eq!(score_mta(&step, &bottom, &cand(0, 0, 0.5, 1.0), 0.5, 0.002).unwrap(), 0.0);
    }

    #[test]
    fn rank_examples() {
        let cs = vec![cand(0, 0, 0.0, 1.0); 3];
        assert_eq!(rank_candidates(&cs, &[3.0, 1.0, 2.0]), vec![1, 2, 0]);
        assert_eq!(rank_candidates(&cs, &[1.0, 1.0, 1.0]), vec![0, 1, 2]);
    }

    #[test]
    fn rank_matches_reference_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cs: Vec<_> = (0..1000)
            .map(|_| cand(rng.random_range(0..5), rng.random_range(0..5), 0.0, 1.0))
            .collect();
        let scores: Vec<f64> = (0..1000).map(|_| rng.random_range(0..50) as f64).collect();
        let got = rank_candidates(&cs, &scores);
        // Reference: sort key tuples, with the index as the final key.
        let mut keys: Vec<(i64, usize, usize, usize)> = (0..1000)
            .map(|i| (scores[i] as i64, cs[i].cell.0, cs[i].cell.1, i))
            .collect();
        keys.sort();
        let want: Vec<usize> = keys.iter().map(|k| k.3).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn heuristic_parse() {
        assert_eq!("HM".parse::<Heuristic>().unwrap(), Heuristic::Hm);
        assert_eq!(Heuristic::Dblf.to_string(), "dblf");
        assert!("gls".parse::<Heuristic>().is_err());
    }
}
