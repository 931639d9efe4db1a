//! Static equilibrium of a stack of rigid bodies under gravity and Coulomb
//! friction.
//!
//! Contacts are found by enlarging every body about its center of mass and
//! intersecting triangles. Contact forces are restricted to a polyhedral
//! cone inscribed in the friction cone, and a linear feasibility problem
//! asks whether forces exist that balance gravity and torque on every item.

pub mod contact;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

pub use contact::{cluster_contacts, Contact, ContactGeometry, ContactParams};

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, RigidTransform, TriangleMesh};
use crate::lp::{solve_feasibility, LinearProgram, LpOutcome};

pub const GRAVITY: f64 = 9.81;

/// Body id reserved for the container.
pub const CONTAINER_ID: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub mu: f64,
    /// Enlargement factor applied about each body's center of mass.
    pub scale: f64,
    pub cluster_grid: f64,
    pub cone_sides: usize,
    /// kg/m^3, used for items without an explicit mass.
    pub density: f64,
    /// See [`ContactParams::gap_tol`].
    pub gap_tol: f64,
    pub lp_tol: f64,
    /// Log every equilibrium LP at debug level.
    #[serde(default)]
    pub dump_lp: bool,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            mu: 0.7,
            scale: 1.03,
            cluster_grid: 0.01,
            cone_sides: 4,
            density: 500.0,
            gap_tol: 0.002,
            lp_tol: crate::lp::DEFAULT_TOL,
            dump_lp: false,
        }
    }
}

impl StabilityConfig {
    fn contact_params(&self) -> ContactParams {
        ContactParams {
            cluster_grid: self.cluster_grid,
            gap_tol: self.gap_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub id: usize,
    pub mass: f64,
    pub com: Point3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProblem {
    pub bodies: Vec<BodyState>,
    pub contacts: Vec<Contact>,
    pub cone_sides: usize,
}

/// Mass of a uniform-density body. Meshes without a usable enclosed volume
/// fall back to their convex hull, then to their bounding box.
pub fn body_mass(mesh: &TriangleMesh, density: f64) -> f64 {
    let v = if mesh.is_watertight_volume() {
        mesh.signed_volume().abs()
    } else {
        convex_hull(mesh)
            .map(|h| h.signed_volume().abs())
            .unwrap_or_else(|_| mesh.aabb().volume())
    };
    (density * v).max(1e-9)
}

/// Orthonormal tangents to `n`, built against the global axis least
/// aligned with it.
pub fn tangent_frame(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let a = axes
        .iter()
        .min_by(|p, q| p.dot(n).abs().total_cmp(&q.dot(n).abs()))
        .unwrap();
    let t1 = (a - n * n.dot(a)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

impl EquilibriumProblem {
    /// Edge directions of the friction pyramid at contact `c`: the pyramid
    /// is the conic hull of these vectors, inscribed in the circular cone.
    pub fn generators(&self, c: &Contact) -> Vec<Vector3<f64>> {
        let (t1, t2) = tangent_frame(&c.normal);
        (0..self.cone_sides)
            .map(|j| {
                let a = std::f64::consts::TAU * j as f64 / self.cone_sides as f64;
                c.normal + (t1 * a.cos() + t2 * a.sin()) * c.mu
            })
            .collect()
    }

    /// Feasibility LP over generator weights (one block of `cone_sides`
    /// non-negative variables per contact). Each non-container body gets
    /// three force and three torque rows, torque taken about its COM.
    /// Forces are in units of the heaviest weight and lever arms in units of
    /// the longest arm, so the tolerance means the same at any scale.
    pub fn to_lp(&self) -> Result<LinearProgram> {
        if self.cone_sides < 3 {
            return Err(Error::validation("friction pyramid needs at least 3 sides"));
        }
        let s = self.cone_sides;
        let n = self.contacts.len() * s;
        let mut lp = LinearProgram::new(n);
        let row_of = |id: usize| self.bodies.iter().position(|b| b.id == id);
        for c in &self.contacts {
            if c.body_a == c.body_b {
                return Err(Error::validation("contact between a body and itself"));
            }
            for id in [c.body_a, c.body_b] {
                if id != CONTAINER_ID && row_of(id).is_none() {
                    return Err(Error::validation(format!("contact references unknown body {id}")));
                }
            }
        }
        let gens: Vec<Vec<Vector3<f64>>> = self.contacts.iter().map(|c| self.generators(c)).collect();
        let (weight, length) = self.units();
        for body in self.bodies.iter().filter(|b| b.id != CONTAINER_ID) {
            let mut rows = vec![vec![0.0; n]; 6];
            for (k, c) in self.contacts.iter().enumerate() {
                let sign = if c.body_b == body.id {
                    1.0
                } else if c.body_a == body.id {
                    -1.0
                } else {
                    continue;
                };
                let arm = (c.point - body.com) / length;
                for (j, g) in gens[k].iter().enumerate() {
                    let f = g * sign;
                    let tau = arm.cross(&f);
                    let col = k * s + j;
                    for d in 0..3 {
                        rows[d][col] = f[d];
                        rows[3 + d][col] = tau[d];
                    }
                }
            }
            // Contact forces cancel the weight m * (0, 0, -g).
            let rhs = [0.0, 0.0, body.mass * GRAVITY / weight, 0.0, 0.0, 0.0];
            for (r, b) in rows.into_iter().zip(rhs) {
                lp.add_eq(r, b);
            }
        }
        for i in 0..n {
            lp.add_nonneg(i);
        }
        Ok(lp)
    }

    fn units(&self) -> (f64, f64) {
        let weight = self
            .bodies
            .iter()
            .map(|b| b.mass * GRAVITY)
            .fold(0.0, f64::max);
        let length = self
            .contacts
            .iter()
            .flat_map(|c| {
                self.bodies
                    .iter()
                    .filter(|b| b.id == c.body_a || b.id == c.body_b)
                    .map(|b| (c.point - b.com).norm())
            })
            .fold(0.0, f64::max);
        let pos = |v: f64| if v.is_finite() && v > 0.0 { v } else { 1.0 };
        (pos(weight), pos(length))
    }

    /// Contact forces in equilibrium, or `None` if none exist.
    pub fn solve(&self, tol: f64) -> Result<Option<Vec<Vector3<f64>>>> {
        // A body with no contact cannot carry its weight.
        for b in self.bodies.iter().filter(|b| b.id != CONTAINER_ID) {
            if !self.contacts.iter().any(|c| c.body_a == b.id || c.body_b == b.id) {
                return Ok(None);
            }
        }
        let lp = self.to_lp()?;
        match solve_feasibility(&lp, tol)? {
            LpOutcome::Feasible(x) => {
                let s = self.cone_sides;
                let (weight, _) = self.units();
                let forces = self
                    .contacts
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        self.generators(c)
                            .iter()
                            .enumerate()
                            .map(|(j, g)| g * (x[k * s + j] * weight))
                            .sum()
                    })
                    .collect();
                Ok(Some(forces))
            }
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Indeterminate(why) => Err(Error::Indeterminate(why)),
        }
    }
}

/// One item prepared for contact and equilibrium queries.
#[derive(Debug, Clone)]
pub struct SceneBody {
    pub id: usize,
    pub state: BodyState,
    pub geometry: ContactGeometry,
}

impl SceneBody {
    /// `mesh` in its own frame, placed by `transform`.
    pub fn new(id: usize, mesh: &TriangleMesh, transform: &RigidTransform, mass: f64, scale: f64) -> SceneBody {
        let world = mesh.transformed(transform);
        let com = world.center_of_mass();
        SceneBody {
            id,
            state: BodyState { id, mass, com },
            geometry: ContactGeometry::new(&world, &com, scale),
        }
    }
}

/// A container with bodies resting in it, plus the clustered contacts
/// among them. Bodies are added one at a time; contacts of a new body are
/// computed against everything already present.
#[derive(Debug, Clone)]
pub struct ContactScene {
    config: StabilityConfig,
    container_mu: f64,
    container: ContactGeometry,
    bodies: Vec<SceneBody>,
    contacts: Vec<Contact>,
}

impl ContactScene {
    pub fn new(container: &Container, config: StabilityConfig) -> ContactScene {
        ContactScene {
            config,
            container_mu: container.mu_wall.unwrap_or(config.mu),
            container: ContactGeometry::rigid(&container.contact_planes(0.1 * container.dims.iter().fold(0.0, |a: f64, b| a.max(*b)))),
            bodies: Vec::new(),
            contacts: Vec::new(),
        }
    }

    pub fn config(&self) -> &StabilityConfig {
        &self.config
    }

    pub fn bodies(&self) -> &[SceneBody] {
        &self.bodies
    }

    pub fn contacts(&self) -> &[Contact] {
        &self.contacts
    }

    /// Next free body id.
    pub fn next_id(&self) -> usize {
        self.bodies.last().map_or(1, |b| b.id + 1)
    }

    pub fn make_body(&self, mesh: &TriangleMesh, transform: &RigidTransform, mass: Option<f64>) -> SceneBody {
        let mass = mass.unwrap_or_else(|| body_mass(mesh, self.config.density));
        SceneBody::new(self.next_id(), mesh, transform, mass, self.config.scale)
    }

    /// Clustered contacts of `body` with the container and every body in
    /// the scene.
    pub fn contacts_of(&self, body: &SceneBody) -> Vec<Contact> {
        let params = self.config.contact_params();
        let mut out = cluster_contacts(
            &contact::pair_contacts(&self.container, CONTAINER_ID, &body.geometry, body.id, self.container_mu, &params),
            params.cluster_grid,
        );
        for other in &self.bodies {
            let raw = contact::pair_contacts(&other.geometry, other.id, &body.geometry, body.id, self.config.mu, &params);
            out.extend(cluster_contacts(&raw, params.cluster_grid));
        }
        out
    }

    /// Equilibrium problem for the scene with `extra` added.
    pub fn problem_with(&self, extra: Option<(&SceneBody, &[Contact])>) -> EquilibriumProblem {
        let mut bodies: Vec<BodyState> = self.bodies.iter().map(|b| b.state).collect();
        let mut contacts = self.contacts.clone();
        if let Some((b, cs)) = extra {
            bodies.push(b.state);
            contacts.extend_from_slice(cs);
        }
        EquilibriumProblem {
            bodies,
            contacts,
            cone_sides: self.config.cone_sides,
        }
    }

    /// Whether the scene stays in equilibrium once `body` is added.
    pub fn is_stable_with(&self, body: &SceneBody) -> Result<bool> {
        let cs = self.contacts_of(body);
        self.solve(&self.problem_with(Some((body, &cs))))
    }

    /// Whether the current scene is in equilibrium.
    pub fn is_stable(&self) -> Result<bool> {
        self.solve(&self.problem_with(None))
    }

    fn solve(&self, problem: &EquilibriumProblem) -> Result<bool> {
        if self.config.dump_lp && log::log_enabled!(log::Level::Debug) {
            log::debug!("equilibrium LP:\n{}", problem.to_lp()?.dump());
        }
        Ok(problem.solve(self.config.lp_tol)?.is_some())
    }

    pub fn push(&mut self, body: SceneBody) {
        let cs = self.contacts_of(&body);
        self.contacts.extend(cs);
        self.bodies.push(body);
    }
}

/// Contacts of `arrangement` (item `k` gets body id `k + 1`) with each
/// other and with the container.
pub fn detect_contacts(
    arrangement: &[(TriangleMesh, RigidTransform)],
    container: &Container,
    mu: f64,
    scale: f64,
    cluster_grid: f64,
) -> Vec<Contact> {
    let config = StabilityConfig {
        mu,
        scale,
        cluster_grid,
        ..Default::default()
    };
    let mut scene = ContactScene::new(container, config);
    for (m, t) in arrangement {
        let b = scene.make_body(m, t, None);
        scene.push(b);
    }
    scene.contacts
}

/// Whether every item of `arrangement` is in static equilibrium.
pub fn is_stable(
    arrangement: &[(TriangleMesh, RigidTransform)],
    container: &Container,
    config: &StabilityConfig,
) -> Result<bool> {
    let mut scene = ContactScene::new(container, *config);
    for (m, t) in arrangement {
        let b = scene.make_body(m, t, None);
        scene.push(b);
    }
    scene.is_stable()
}
