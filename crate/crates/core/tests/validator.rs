use nalgebra::{Point3, Vector3};
use stackpack::geometry::box_mesh;
use stackpack::plan::{Fallback, PlanStep};
use stackpack::planner::{PackItem, SearchConfig};
use stackpack::validate::{validate_plan, Violation};
use stackpack::{Container, PackingPlan, RigidTransform};

/// Cube edge (m).
const S: f64 = 0.1;

fn cube() -> PackItem {
    PackItem::new("cube", box_mesh(Point3::origin(), Point3::new(S, S, S)))
}

fn slab(min: [f64; 3], max: [f64; 3]) -> PackItem {
    PackItem::new("slab", box_mesh(Point3::from(min), Point3::from(max)))
}

fn step(item: usize, x: f64, y: f64, z: f64) -> PlanStep {
    PlanStep {
        item,
        mesh: "cube".into(),
        transform: (&RigidTransform::from_translation(Vector3::new(x, y, z))).into(),
        score: 0.0,
        fallback: Fallback::None,
        candidates_generated: 0,
        candidates_checked: 0,
    }
}

fn config() -> SearchConfig {
    SearchConfig {
        resolution: 0.005,
        check_manipulation: false,
        ..Default::default()
    }
}

fn plan(c: Container, steps: Vec<PlanStep>) -> PackingPlan {
    let mut p = PackingPlan::new(c, config());
    p.steps = steps;
    p
}

#[test]
fn coincident_cubes_overlap_fully() {
    let c = Container::new(2.0 * S, S, S).unwrap();
    let p = plan(c, vec![step(0, 0.0, 0.0, 0.0), step(1, 0.0, 0.0, 0.0)]);
    let r = validate_plan(&p, &[cube(), cube()], &c, &config()).unwrap();
    assert!(!r.pass);
    assert_eq!(r.first_failure, Some((1, Violation::Overlap)));
    assert!((r.steps[1].penetration - S).abs() < 1e-4, "{}", r.steps[1].penetration);
    assert_eq!(r.steps[0].penetration, 0.0);
}

#[test]
fn side_by_side_cubes_pass() {
    let c = Container::new(2.0 * S, S, S).unwrap();
    let p = plan(c, vec![step(0, 0.0, 0.0, 0.0), step(1, S, 0.0, 0.0)]);
    let r = validate_plan(&p, &[cube(), cube()], &c, &config()).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.steps.len(), 2);
    assert!(r.steps.iter().all(|s| s.stable == Some(true) && s.manip_ok.is_none()));
}

#[test]
fn cube_past_an_edge_is_unstable() {
    // Center of mass a tenth of an edge beyond the supporting cube. Both
    // cubes stand clear of the walls, so wall friction cannot hold them.
    let c = Container::new(3.0 * S, 1.5 * S, 2.0 * S).unwrap();
    let y = 0.25 * S;
    let p = plan(c, vec![step(0, 0.0, y, 0.0), step(1, 0.6 * S, y, S)]);
    let r = validate_plan(&p, &[cube(), cube()], &c, &config()).unwrap();
    assert_eq!(r.first_failure, Some((1, Violation::Stability)));
    assert_eq!(r.steps[0].stable, Some(true));
    // Supported under its center of mass instead: fine.
    let p = plan(c, vec![step(0, 0.0, y, 0.0), step(1, 0.4 * S, y, S)]);
    assert!(validate_plan(&p, &[cube(), cube()], &c, &config()).unwrap().pass);
}

#[test]
fn item_outside_container_fails_containment() {
    let c = Container::new(2.0 * S, S, S).unwrap();
    let p = plan(c, vec![step(0, 1.5 * S, 0.0, 0.0)]);
    let r = validate_plan(&p, &[cube()], &c, &config()).unwrap();
    assert_eq!(r.first_failure, Some((0, Violation::Containment)));
    assert!((r.steps[0].containment_margin + 0.5 * S).abs() < 1e-12);
}

#[test]
fn records_every_step_after_a_failure() {
    let c = Container::new(3.0 * S, S, S).unwrap();
    let p = plan(c, vec![step(0, 0.0, 0.0, 0.0), step(1, 0.0, 0.0, 0.0), step(2, 2.0 * S, 0.0, 0.0)]);
    let r = validate_plan(&p, &[cube(), cube(), cube()], &c, &config()).unwrap();
    assert_eq!(r.steps.len(), 3);
    assert!(r.steps[2].violations.is_empty());
}

#[test]
fn buried_item_fails_manipulation() {
    // A low slab at the bottom of a walled pit: the gripper footprint is
    // longer than the pit, so it always lands on a wall top.
    let (w, h) = (0.01, 0.15);
    let c = Container::new(S + 2.0 * w, S + 2.0 * w, 0.2).unwrap();
    let cfg = SearchConfig {
        check_manipulation: true,
        check_stability: false,
        ..config()
    };
    let (x1, y1) = (S + w, S + w);
    let items = vec![
        slab([0.0, 0.0, 0.0], [w, y1 + w, h]),
        slab([x1, 0.0, 0.0], [x1 + w, y1 + w, h]),
        slab([w, 0.0, 0.0], [x1, w, h]),
        slab([w, y1, 0.0], [x1, y1 + w, h]),
        slab([0.0, 0.0, 0.0], [S, S, 0.5 * S]),
    ];
    let mut steps: Vec<PlanStep> = (0..4).map(|i| step(i, 0.0, 0.0, 0.0)).collect();
    steps.push(step(4, w, w, 0.0));
    let mut p = plan(c, steps);
    p.config = cfg.clone();
    let r = validate_plan(&p, &items, &c, &cfg).unwrap();
    assert!(r.steps[..4].iter().all(|s| s.violations.is_empty()), "{r:?}");
    assert_eq!(r.steps[4].manip_ok, Some(false), "{r:?}");
    assert_eq!(r.first_failure, Some((4, Violation::Manipulation)));
}

#[test]
fn unknown_item_is_an_error() {
    let c = Container::new(2.0 * S, S, S).unwrap();
    let p = plan(c, vec![step(3, 0.0, 0.0, 0.0)]);
    assert!(validate_plan(&p, &[cube()], &c, &config()).is_err());
}
