//! Brute-force reference computations used to check the planner's fast
//! paths.

use std::f64::consts::TAU;

use nalgebra::{Point3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackpack::geometry::query::{triangle_intersection, Triangle};
use stackpack::geometry::{box_mesh, raycast_heightmaps, rotation_rpy, MeshBvh, Sampling};
use stackpack::heightmap::{container_heightmap_sampled, lowest_z};
use stackpack::items::{generate_test_items, procedural_order};
use stackpack::orientation::planar_stable_orientations;
use stackpack::stability::StabilityConfig;
use stackpack::{Container, RigidTransform, TriangleMesh};

pub type Arrangement = Vec<(TriangleMesh, RigidTransform)>;

/// True if any triangle of `a` crosses a triangle of `b`.
pub fn surfaces_intersect(a: &[Triangle], b: &MeshBvh) -> bool {
    let mut hits = Vec::new();
    a.iter().any(|t| {
        let bb = stackpack::geometry::Aabb::from_points(t.iter()).expect("three points");
        b.overlapping(&bb, &mut hits);
        hits.iter().any(|&j| triangle_intersection(t, &b.triangles()[j], 1e-12).is_some())
    })
}

/// Lowers `object` (resting at `z = 0`) from above the terrain in steps of
/// `step` and returns the last height on the step grid where it is still
/// clear of `terrain`. Never below the floor.
pub fn sweep_lowest_z(object: &TriangleMesh, terrain: &MeshBvh, step: f64) -> f64 {
    let top = terrain.aabb().map_or(0.0, |b| b.max.z);
    let tris: Vec<Triangle> = object.triangle_iter().collect();
    let mut k = (top / step).ceil() as i64 + 1;
    while k >= 0 {
        let dz = Vector3::new(0.0, 0.0, k as f64 * step);
        let moved: Vec<Triangle> = tris.iter().map(|t| t.map(|p| p + dz)).collect();
        if surfaces_intersect(&moved, terrain) {
            return (k + 1) as f64 * step;
        }
        k -= 1;
    }
    0.0
}

/// `mesh` rotated by `rpy` and moved so its bounding box starts at
/// `(x, y, 0)`.
pub fn rest_at(mesh: &TriangleMesh, rpy: [f64; 3], x: f64, y: f64) -> (TriangleMesh, RigidTransform) {
    let min = mesh.rotated(&rotation_rpy(rpy[0], rpy[1], rpy[2])).aabb().min;
    let t = RigidTransform::new(rpy[0], rpy[1], rpy[2], Vector3::new(x - min.x, y - min.y, -min.z));
    (mesh.transformed(&t), t)
}

fn random_rpy(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)]
}

/// One of the mesh's resting poses, picked at random, with a random yaw.
fn random_resting_rpy(rng: &mut ChaCha8Rng, mesh: &TriangleMesh) -> [f64; 3] {
    let poses = planar_stable_orientations(mesh, usize::MAX).unwrap();
    let o = poses[rng.random_range(0..poses.len())];
    [o.roll, o.pitch, rng.random_range(0.0..TAU)]
}

/// How objects and terrain pieces are turned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Poses {
    /// Uniformly random roll, pitch and yaw.
    Arbitrary,
    /// A resting pose with random yaw, as the planner places items.
    Resting,
}

fn pose(rng: &mut ChaCha8Rng, mesh: &TriangleMesh, poses: Poses) -> [f64; 3] {
    match poses {
        Poses::Arbitrary => random_rpy(rng),
        Poses::Resting => random_resting_rpy(rng, mesh),
    }
}

pub struct LowestZCase {
    pub heightmap: f64,
    pub sweep: f64,
}

/// One random object over a random pile of procedural items: the
/// heightmap's lowest Z at a random cell, and the brute-force sweep result
/// for the same footprint position.
pub fn lowest_z_case(seed: u64, resolution: f64, step: f64, sampling: Sampling, poses: Poses) -> LowestZCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let container = Container::new(0.25, 0.25, 0.4).unwrap();
    let mut terrain = Vec::new();
    for (n, (kind, params)) in procedural_order(4, seed, 0.04, 0.12).into_iter().enumerate() {
        let mesh = generate_test_items(kind, &params, seed + n as u64).unwrap();
        let rpy = pose(&mut rng, &mesh, poses);
        let ext = mesh.rotated(&rotation_rpy(rpy[0], rpy[1], rpy[2])).aabb().extents();
        let x = rng.random_range(0.0..(container.length() - ext.x).max(1e-6));
        let y = rng.random_range(0.0..(container.width() - ext.y).max(1e-6));
        let (_, t) = rest_at(&mesh, rpy, x, y);
        terrain.push((mesh, t));
    }
    let hc = container_heightmap_sampled(&container, &terrain, resolution, sampling);
    let world: Vec<TriangleMesh> = terrain.iter().map(|(m, t)| m.transformed(t)).collect();
    let bvh = MeshBvh::new(&TriangleMesh::merge(&world).unwrap());

    let (kind, params) = procedural_order(1, seed ^ 0x5eed, 0.03, 0.1)[0];
    let object = generate_test_items(kind, &params, seed).unwrap();
    let rpy = pose(&mut rng, &object, poses);
    let maps = raycast_heightmaps(&object, &rotation_rpy(rpy[0], rpy[1], rpy[2]), resolution, sampling);
    let x = rng.random_range(0..=hc.width() - maps.width());
    let y = rng.random_range(0..=hc.height() - maps.height());
    let z = lowest_z(&hc, &maps.bottom, x, y).unwrap();
    let (placed, _) = rest_at(&object, rpy, x as f64 * resolution, y as f64 * resolution);
    LowestZCase {
        heightmap: z,
        sweep: sweep_lowest_z(&placed, &bvh, step),
    }
}

/// Axis-aligned-on-the-floor box `size`, base at `z0`, yawed about its
/// vertical center line through `(cx, cy)`.
pub fn yawed_box(size: [f64; 3], cx: f64, cy: f64, z0: f64, yaw: f64) -> (TriangleMesh, RigidTransform) {
    let h = [size[0] / 2.0, size[1] / 2.0];
    let mesh = box_mesh(Point3::new(-h[0], -h[1], 0.0), Point3::new(h[0], h[1], size[2]));
    (mesh, RigidTransform::new(0.0, 0.0, yaw, Vector3::new(cx, cy, z0)))
}

/// Signed distance from `p` to the edge of a yawed rectangle, positive
/// inside.
fn rect_depth(p: Vector2<f64>, center: Vector2<f64>, half: [f64; 2], yaw: f64) -> f64 {
    let d = p - center;
    let (s, c) = yaw.sin_cos();
    let local = Vector2::new(c * d.x + s * d.y, -s * d.x + c * d.y);
    (half[0] - local.x.abs()).min(half[1] - local.y.abs())
}

pub fn frictionless() -> StabilityConfig {
    StabilityConfig {
        mu: 0.0,
        ..Default::default()
    }
}

pub fn frictionless_container(l: f64, w: f64, h: f64) -> Container {
    let mut c = Container::new(l, w, h).unwrap();
    c.mu_wall = Some(0.0);
    c
}

pub struct StabilityCase {
    pub name: String,
    pub arrangement: Arrangement,
    pub container: Container,
    pub config: StabilityConfig,
    pub stable: bool,
}

/// A random box resting on another random box, both yawed, clear of the
/// walls. Without friction the top box stands iff its center of mass lies
/// over the overlap of the two footprints. Positions within `margin` of
/// that boundary are resampled.
pub fn frictionless_stack(seed: u64, margin: f64) -> StabilityCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let container = frictionless_container(0.5, 0.5, 0.4);
    let c0 = Vector2::new(0.25, 0.25);
    loop {
        let mut dims = || [rng.random_range(0.06..0.14), rng.random_range(0.06..0.14), rng.random_range(0.03..0.08)];
        let (a, b) = (dims(), dims());
        let (ya, yb) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let c1 = c0 + Vector2::new(rng.random_range(-0.06..0.06), rng.random_range(-0.06..0.06));
        // The top box's own footprint always contains its center, so only
        // the lower footprint can cut the support region short.
        let depth = rect_depth(c1, c0, [a[0] / 2.0, a[1] / 2.0], ya);
        if depth.abs() < margin {
            continue;
        }
        return StabilityCase {
            name: format!("random stack {seed}"),
            arrangement: vec![yawed_box(a, c0.x, c0.y, 0.0, ya), yawed_box(b, c1.x, c1.y, a[2], yb)],
            container,
            config: frictionless(),
            stable: depth > 0.0,
        };
    }
}

/// Hand-checked scenes with known verdicts.
pub fn analytic_cases() -> Vec<StabilityCase> {
    let s = 0.1;
    let cube = |x: f64, y: f64, z: f64| yawed_box([s, s, s], x, y, z, 0.0);
    let case = |name: &str, arrangement: Arrangement, config: StabilityConfig, stable: bool| StabilityCase {
        name: name.into(),
        arrangement,
        container: frictionless_container(0.6, 0.4, 0.4),
        config,
        stable,
    };
    let beam = |x: f64, len: f64| yawed_box([len, s, 0.02], x, 0.2, s, 0.0);
    vec![
        case("cube on floor", vec![cube(0.3, 0.2, 0.0)], frictionless(), true),
        case("cube on floor with friction", vec![cube(0.3, 0.2, 0.0)], StabilityConfig::default(), true),
        case("stacked pair", vec![cube(0.3, 0.2, 0.0), cube(0.3, 0.2, s)], frictionless(), true),
        case("overhang within support", vec![cube(0.3, 0.2, 0.0), cube(0.33, 0.2, s)], frictionless(), true),
        case("overhang past the edge", vec![cube(0.3, 0.2, 0.0), cube(0.37, 0.2, s)], frictionless(), false),
        case(
            "overhang past the edge with friction",
            vec![cube(0.3, 0.2, 0.0), cube(0.37, 0.2, s)],
            StabilityConfig::default(),
            false,
        ),
        case(
            "three-block bridge",
            vec![cube(0.15, 0.2, 0.0), cube(0.45, 0.2, 0.0), beam(0.3, 0.4)],
            frictionless(),
            true,
        ),
        case(
            "lopsided bridge",
            vec![cube(0.15, 0.2, 0.0), cube(0.45, 0.2, 0.0), beam(0.27, 0.36)],
            frictionless(),
            true,
        ),
        case(
            "beam off one pillar",
            vec![cube(0.15, 0.2, 0.0), cube(0.45, 0.2, 0.0), beam(0.21, 0.2)],
            frictionless(),
            false,
        ),
        case("floating cube", vec![cube(0.3, 0.2, 0.05)], StabilityConfig::default(), false),
    ]
}
