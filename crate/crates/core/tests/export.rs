use nalgebra::{Point3, Vector3};
use stackpack::export::export_scene;
use stackpack::geometry::{box_mesh, load_mesh_auto};
use stackpack::items::{generate_test_items, ItemKind, ItemParams};
use stackpack::plan::{Fallback, PlanStep};
use stackpack::{Container, PackItem, PackingPlan, RigidTransform, SearchConfig};

fn step(item: usize, t: RigidTransform) -> PlanStep {
    PlanStep {
        item,
        mesh: String::new(),
        transform: (&t).into(),
        score: 0.0,
        fallback: Fallback::None,
        candidates_generated: 0,
        candidates_checked: 0,
    }
}

fn names(files: &[std::path::PathBuf]) -> Vec<String> {
    files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect()
}

#[test]
fn empty_plan_exports_the_shell() {
    let dir = tempfile::tempdir().unwrap();
    let c = Container::new(0.3, 0.2, 0.1).unwrap();
    let plan = PackingPlan::new(c, SearchConfig::default());
    let files = export_scene(&plan, &[], &c, dir.path()).unwrap();
    assert_eq!(names(&files), vec!["container.obj"]);
    assert_eq!(load_mesh_auto(&files[0]).unwrap().vertices().len(), 8);
}

#[test]
fn two_item_plan_exports_steps_and_heightmap() {
    let dir = tempfile::tempdir().unwrap();
    let c = Container::new(0.3, 0.2, 0.15).unwrap();
    let items = vec![
        PackItem::new("slab", box_mesh(Point3::origin(), Point3::new(0.1, 0.1, 0.05))),
        PackItem::new("bowl", generate_test_items(ItemKind::Bowl, &ItemParams::sized(0.1, 0.1, 0.04), 0).unwrap()),
    ];
    let mut plan = PackingPlan::new(c, SearchConfig { resolution: 0.01, ..Default::default() });
    plan.steps = vec![
        step(0, RigidTransform::identity()),
        step(1, RigidTransform::new(0.0, 0.0, 0.3, Vector3::new(0.2, 0.1, 0.0))),
    ];
    let files = export_scene(&plan, &items, &c, &dir.path().join("out")).unwrap();
    assert_eq!(names(&files), vec!["step_001.obj", "step_002.obj", "heightmap.pgm"]);

    let expect = 8 + items.iter().map(|i| i.mesh.vertices().len()).sum::<usize>();
    assert_eq!(load_mesh_auto(&files[1]).unwrap().vertices().len(), expect);
    assert_eq!(load_mesh_auto(&files[0]).unwrap().vertices().len(), 8 + items[0].mesh.vertices().len());

    let pgm = std::fs::read_to_string(&files[2]).unwrap();
    assert!(pgm.starts_with("P2"));
    // 30 x 20 cells of 1 cm.
    assert!(pgm.lines().any(|l| l.trim() == "30 20"), "{pgm}");
}

#[test]
fn unknown_item_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let c = Container::new(0.3, 0.2, 0.1).unwrap();
    let mut plan = PackingPlan::new(c, SearchConfig::default());
    plan.steps = vec![step(2, RigidTransform::identity())];
    assert!(export_scene(&plan, &[], &c, dir.path()).is_err());
}
