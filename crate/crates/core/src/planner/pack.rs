//! Single-item placement with constraint checks, and the multi-item
//! pipeline with its fallback passes.

use rayon::prelude::*;

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::query::{vertical_gap, Triangle};
use crate::geometry::{wrap_angle, MeshBvh, RigidTransform, TriangleMesh};
use crate::heightmap::{container_heightmap_sampled, container_cells, HeightMap};
use crate::heuristics::{rank_candidates, PlacementCandidate};
use crate::manipulation::{always_feasible, grasp_candidates_from_maps, is_manip_feasible, ExternalCheck, GraspCandidate, PlacementView};
use crate::orientation::planar_stable_orientations;
use crate::plan::{Fallback, PackingPlan, PlanStep};
use crate::planner::search::{search, Orientation, OrientedItem};
use crate::planner::SearchConfig;
use crate::stability::{ContactScene, SceneBody};

/// Orientations closer than this (rad, per angle) are the same.
const ANGLE_DEDUP: f64 = 1e-6;

/// An item to pack.
#[derive(Debug, Clone)]
pub struct PackItem {
    /// Label recorded in the plan, usually the mesh path.
    pub name: String,
    pub mesh: TriangleMesh,
    /// Overrides the uniform-density mass (kg).
    pub mass: Option<f64>,
}

impl PackItem {
    pub fn new(name: impl Into<String>, mesh: TriangleMesh) -> PackItem {
        PackItem {
            name: name.into(),
            mesh,
            mass: None,
        }
    }
}

/// The container with the items placed so far.
#[derive(Debug, Clone)]
pub struct PackedState {
    pub container: Container,
    pub hc: HeightMap,
    /// `(item index, transform)` in placement order.
    pub placed: Vec<(usize, RigidTransform)>,
    scene: ContactScene,
    /// World triangles of every placed item.
    terrain: MeshBvh,
}

impl PackedState {
    pub fn new(container: &Container, config: &SearchConfig) -> PackedState {
        let (nx, ny) = container_cells(container, config.resolution);
        PackedState {
            container: *container,
            hc: HeightMap::zeros([0.0, 0.0], config.resolution, nx, ny).expect("positive resolution"),
            placed: Vec::new(),
            scene: ContactScene::new(container, config.stability),
            terrain: MeshBvh::from_triangles(Vec::new()),
        }
    }

    pub fn scene(&self) -> &ContactScene {
        &self.scene
    }

    /// Lowers a candidate onto the placed meshes (or the floor). The
    /// heightmap Z is conservative, so it can leave the item hovering a
    /// few millimeters above its supports, too far for contact detection.
    pub fn settle(&self, mesh: &TriangleMesh, c: &PlacementCandidate) -> PlacementCandidate {
        let tris: Vec<Triangle> = mesh.transformed(&c.transform).triangle_iter().collect();
        let drop = vertical_gap(&tris, &self.terrain).min(c.position.z);
        let mut out = c.clone();
        if drop > 0.0 {
            out.position.z -= drop;
            out.transform.translation.z -= drop;
        }
        out
    }
}

/// The chosen placement of one item.
#[derive(Debug, Clone)]
pub struct Placement {
    pub candidate: PlacementCandidate,
    pub oriented: OrientedItem,
    body: Option<SceneBody>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub generated: usize,
    pub checked: usize,
}

/// Result of one candidate's constraint checks.
enum Verdict {
    Pass(Box<PlacementCandidate>, Option<SceneBody>),
    Fail,
}

/// Finds the best-ranked candidate for `item` that passes the enabled
/// checks, trying at most `candidate_cap` of them in rank order.
pub fn pack_one_item(
    item: &PackItem,
    orientations: &[Orientation],
    state: &PackedState,
    config: &SearchConfig,
    external: ExternalCheck<'_>,
) -> (Option<Placement>, SearchStats) {
    let out = search(&item.mesh, &state.container, orientations, &state.hc, config);
    let n_yaws = config.yaws().len();
    let mut stats = SearchStats {
        generated: out.candidates.len(),
        checked: 0,
    };
    if out.candidates.is_empty() {
        return (None, stats);
    }
    let scores: Vec<f64> = out.candidates.iter().map(|c| c.score).collect();
    let order = rank_candidates(&out.candidates, &scores);
    let cap = config.candidate_cap.unwrap_or(usize::MAX).min(order.len());

    let grasps: Vec<Vec<GraspCandidate>> = if config.check_manipulation {
        out.oriented
            .par_iter()
            .map(|o| {
                grasp_candidates_from_maps(&o.maps, &o.rotation, &config.gripper, config.grasp_yaw_steps, config.resolution)
                    .unwrap_or_default()
            })
            .collect()
    } else {
        Vec::new()
    };

    let check = |c: &PlacementCandidate| -> Verdict {
        let oriented = out.oriented_for(c, n_yaws);
        if config.check_manipulation {
            let view = PlacementView {
                transform: &c.transform,
                maps: &oriented.maps,
                cell: c.cell,
                z: c.position.z,
            };
            let g = &grasps[c.orientation_index * n_yaws + c.yaw_index];
            if !is_manip_feasible(&view, &state.hc, &config.gripper, g, external) {
                return Verdict::Fail;
            }
        }
        let settled = Box::new(state.settle(&item.mesh, c));
        if config.check_stability {
            let body = state.scene.make_body(&item.mesh, &settled.transform, item.mass);
            return match state.scene.is_stable_with(&body) {
                Ok(true) => Verdict::Pass(settled, Some(body)),
                Ok(false) => Verdict::Fail,
                Err(e) => {
                    log::debug!("stability check failed: {e}");
                    Verdict::Fail
                }
            };
        }
        Verdict::Pass(settled, None)
    };

    // Check in parallel chunks; the winner is the first passing candidate in
    // rank order, exactly as a sequential scan would find.
    let chunk = rayon::current_num_threads().max(1);
    let mut start = 0;
    while start < cap {
        let end = (start + chunk).min(cap);
        let verdicts: Vec<Verdict> = order[start..end]
            .par_iter()
            .map(|&i| check(&out.candidates[i]))
            .collect();
        for (k, v) in verdicts.into_iter().enumerate() {
            if let Verdict::Pass(candidate, body) = v {
                stats.checked = start + k + 1;
                let candidate = *candidate;
                let oriented = out.oriented_for(&candidate, n_yaws).clone();
                return (
                    Some(Placement {
                        candidate,
                        oriented,
                        body,
                    }),
                    stats,
                );
            }
        }
        start = end;
    }
    stats.checked = cap;
    (None, stats)
}

/// Records `placement` of item `index` in `state`.
pub fn commit(state: &mut PackedState, items: &[PackItem], index: usize, placement: Placement, config: &SearchConfig) {
    let c = &placement.candidate;
    let maps = &placement.oriented.maps;
    state
        .hc
        .place(&maps.top, Some(&maps.bottom), c.cell.0, c.cell.1, c.position.z)
        .expect("candidate windows fit the container map");
    state.placed.push((index, c.transform));
    let mut tris = state.terrain.triangles().to_vec();
    tris.extend(items[index].mesh.transformed(&c.transform).triangle_iter());
    state.terrain = MeshBvh::from_triangles(tris);
    if config.check_stability {
        let body = placement
            .body
            .unwrap_or_else(|| state.scene.make_body(&items[index].mesh, &c.transform, items[index].mass));
        state.scene.push(body);
    }
    if config.debug_reraycast {
        let placed: Vec<(TriangleMesh, RigidTransform)> =
            state.placed.iter().map(|(i, t)| (items[*i].mesh.clone(), *t)).collect();
        let full = container_heightmap_sampled(&state.container, &placed, config.resolution, config.sampling);
        let diff = full
            .data()
            .iter()
            .zip(state.hc.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff > 1e-9 {
            log::warn!("incremental heightmap differs from re-raycast by {diff:e} m");
        }
    }
}

/// Item indices sorted by decreasing bounding-box volume; equal volumes
/// keep their input order.
pub fn sequence_items(meshes: &[TriangleMesh]) -> Vec<usize> {
    let vols: Vec<f64> = meshes.iter().map(|m| m.aabb().volume()).collect();
    let mut order: Vec<usize> = (0..meshes.len()).collect();
    order.sort_by(|&a, &b| vols[b].total_cmp(&vols[a]));
    order
}

/// Most likely resting orientations of `mesh`, or the identity when its
/// hull is degenerate.
pub fn base_orientations(mesh: &TriangleMesh, top_n: usize) -> Vec<Orientation> {
    match planar_stable_orientations(mesh, top_n) {
        Ok(v) if !v.is_empty() => {
            if v.len() < top_n {
                log::debug!("only {} resting orientations available", v.len());
            }
            v.iter()
                .map(|o| Orientation {
                    roll: o.roll,
                    pitch: o.pitch,
                })
                .collect()
        }
        Ok(_) => vec![Orientation { roll: 0.0, pitch: 0.0 }],
        Err(e) => {
            log::warn!("no resting orientations ({e}); using the mesh frame");
            vec![Orientation { roll: 0.0, pitch: 0.0 }]
        }
    }
}

fn same_angle(a: f64, b: f64) -> bool {
    wrap_angle(a - b).abs() < ANGLE_DEDUP
}

fn push_unique(set: &mut Vec<Orientation>, o: Orientation) -> bool {
    if set.iter().any(|q| same_angle(q.roll, o.roll) && same_angle(q.pitch, o.pitch)) {
        return false;
    }
    set.push(o);
    true
}

fn perturbed(base: &[Orientation], tr: f64, tp: f64) -> Vec<Orientation> {
    let mut out = Vec::new();
    for o in base {
        push_unique(
            &mut out,
            Orientation {
                roll: wrap_angle(o.roll + tr),
                pitch: wrap_angle(o.pitch + tp),
            },
        );
    }
    out
}

/// Every perturbation of every resting orientation, deduplicated.
pub fn all_perturbed(base: &[Orientation], config: &SearchConfig) -> Vec<Orientation> {
    let steps = config.perturbations();
    let mut out = Vec::new();
    for &tr in &steps {
        for &tp in &steps {
            for o in perturbed(base, tr, tp) {
                push_unique(&mut out, o);
            }
        }
    }
    out
}

/// A failed run: the item that could not be placed, the plan up to that
/// point, and the container heightmap at failure.
#[derive(Debug, Clone)]
pub struct PackFailure {
    pub item: usize,
    pub partial: PackingPlan,
    pub heightmap: HeightMap,
}

#[derive(Debug, Clone)]
pub enum PackOutcome {
    Packed(PackingPlan),
    Failed(Box<PackFailure>),
}

impl PackOutcome {
    pub fn plan(&self) -> &PackingPlan {
        match self {
            PackOutcome::Packed(p) => p,
            PackOutcome::Failed(f) => &f.partial,
        }
    }

    pub fn is_packed(&self) -> bool {
        matches!(self, PackOutcome::Packed(_))
    }
}

pub fn pack_all(items: &[PackItem], container: &Container, sequence: &[usize], config: &SearchConfig) -> Result<PackOutcome> {
    pack_all_with(items, container, sequence, config, &always_feasible)
}

/// Packs `items` in `sequence` order. Items that fail the first pass are
/// retried afterwards, first unchanged and then with perturbed roll and
/// pitch.
pub fn pack_all_with(
    items: &[PackItem],
    container: &Container,
    sequence: &[usize],
    config: &SearchConfig,
    external: ExternalCheck<'_>,
) -> Result<PackOutcome> {
    config.validate()?;
    container.check()?;
    if items.is_empty() {
        return Err(Error::validation("no items to pack"));
    }
    let mut seen = vec![false; items.len()];
    for &s in sequence {
        if s >= items.len() || std::mem::replace(&mut seen[s], true) {
            return Err(Error::validation(format!("sequence entry {s} is out of range or repeated")));
        }
    }

    let mut plan = PackingPlan::new(*container, config.clone());
    let mut state = PackedState::new(container, config);
    let base: Vec<Vec<Orientation>> = items.iter().map(|it| base_orientations(&it.mesh, config.top_n)).collect();
    let first_pass = |i: usize| {
        if config.force_5d {
            all_perturbed(&base[i], config)
        } else {
            base[i].clone()
        }
    };

    let record = |state: &mut PackedState, plan: &mut PackingPlan, i: usize, p: Placement, stats: SearchStats, fb: Fallback| {
        plan.steps.push(PlanStep {
            item: i,
            mesh: items[i].name.clone(),
            transform: (&p.candidate.transform).into(),
            score: p.candidate.score,
            fallback: fb,
            candidates_generated: stats.generated,
            candidates_checked: stats.checked,
        });
        commit(state, items, i, p, config);
    };

    let mut unplaced = Vec::new();
    for &i in sequence {
        let (found, stats) = pack_one_item(&items[i], &first_pass(i), &state, config, external);
        match found {
            Some(p) => record(&mut state, &mut plan, i, p, stats, Fallback::None),
            None => {
                log::info!("item {i} deferred after {} candidates", stats.generated);
                unplaced.push(i);
            }
        }
    }

    for &u in &unplaced {
        let mut placed = false;
        if config.force_5d {
            let (found, stats) = pack_one_item(&items[u], &first_pass(u), &state, config, external);
            if let Some(p) = found {
                record(&mut state, &mut plan, u, p, stats, Fallback::Resequenced);
                placed = true;
            }
        } else {
            let mut tried: Vec<Orientation> = Vec::new();
            'outer: for &tr in &config.perturbations() {
                for &tp in &config.perturbations() {
                    let plain = tr == 0.0 && tp == 0.0;
                    let mut set = perturbed(&base[u], tr, tp);
                    if !plain {
                        set.retain(|o| !tried.iter().any(|q| same_angle(q.roll, o.roll) && same_angle(q.pitch, o.pitch)));
                    }
                    for o in &set {
                        push_unique(&mut tried, *o);
                    }
                    if set.is_empty() {
                        continue;
                    }
                    let (found, stats) = pack_one_item(&items[u], &set, &state, config, external);
                    if let Some(p) = found {
                        let fb = if plain { Fallback::Resequenced } else { Fallback::FiveD };
                        record(&mut state, &mut plan, u, p, stats, fb);
                        placed = true;
                        break 'outer;
                    }
                }
            }
        }
        if !placed {
            return Ok(PackOutcome::Failed(Box::new(PackFailure {
                item: u,
                partial: plan,
                heightmap: state.hc,
            })));
        }
    }
    Ok(PackOutcome::Packed(plan))
}
