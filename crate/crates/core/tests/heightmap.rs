mod common;

use common::oracles::{lowest_z_case, rest_at, sweep_lowest_z, Poses};
use nalgebra::Point3;
use proptest::prelude::*;
use stackpack::geometry::{box_mesh, raycast_heightmaps, MeshBvh, Sampling};
use stackpack::heightmap::{container_heightmap, lowest_z, update_heightmap};
use stackpack::{Container, HeightMap, RigidTransform, TriangleMesh};

const RES: f64 = 0.005;
const STEP: f64 = 0.001;

/// A square frame with a square hole through the middle.
fn frame(outer: f64, hole: f64, h: f64) -> TriangleMesh {
    let a = (outer - hole) / 2.0;
    let b = a + hole;
    let parts = [
        box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(a, outer, h)),
        box_mesh(Point3::new(b, 0.0, 0.0), Point3::new(outer, outer, h)),
        box_mesh(Point3::new(a, 0.0, 0.0), Point3::new(b, a, h)),
        box_mesh(Point3::new(a, b, 0.0), Point3::new(b, outer, h)),
    ];
    TriangleMesh::merge(&parts).unwrap()
}

#[test]
fn frame_drops_over_a_post_through_its_hole() {
    let c = Container::new(0.2, 0.2, 0.3).unwrap();
    let post = box_mesh(Point3::new(0.09, 0.09, 0.0), Point3::new(0.11, 0.11, 0.2));
    let hc = container_heightmap(&c, &[(post.clone(), RigidTransform::identity())], RES);
    let ring = frame(0.1, 0.04, 0.02);
    let maps = raycast_heightmaps(&ring, &nalgebra::Rotation3::identity(), RES, Sampling::Footprint);
    assert!(maps.bottom.get(10, 10).is_infinite());
    // Centered over the post, the post passes through the hole.
    assert_eq!(lowest_z(&hc, &maps.bottom, 10, 10).unwrap(), 0.0);
    let (placed, _) = rest_at(&ring, [0.0; 3], 0.05, 0.05);
    assert_eq!(sweep_lowest_z(&placed, &MeshBvh::new(&post), STEP), 0.0);
    // Shifted so the frame lands on the post top.
    assert!((lowest_z(&hc, &maps.bottom, 2, 10).unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn stacked_boxes_add_heights() {
    let c = Container::new(0.32, 0.32, 0.3).unwrap();
    let b = box_mesh(Point3::origin(), Point3::new(0.02, 0.02, 0.1));
    let up = RigidTransform::from_translation(nalgebra::Vector3::new(0.0, 0.0, 0.1));
    let hc = container_heightmap(&c, &[(b.clone(), RigidTransform::identity()), (b, up)], 0.002);
    assert_eq!((hc.width(), hc.height()), (160, 160));
    for j in 0..160 {
        for i in 0..160 {
            let expect = if i < 10 && j < 10 { 0.2 } else { 0.0 };
            assert!((hc.get(i, j) - expect).abs() < 1e-12, "({i}, {j})");
        }
    }
}

#[test]
fn lowest_z_bounds_the_mesh_sweep() {
    for poses in [Poses::Resting, Poses::Arbitrary] {
        for seed in 0..20 {
            let case = lowest_z_case(seed, RES, STEP, Sampling::Footprint, poses);
            // The sweep stops on a 1 mm grid above the true contact height.
            assert!(case.heightmap >= case.sweep - STEP - 1e-9, "{poses:?} seed {seed}: {} < {}", case.heightmap, case.sweep);
            assert!(case.heightmap.is_finite());
        }
    }
}

fn grid(w: usize, h: usize) -> impl Strategy<Value = HeightMap> {
    prop::collection::vec(0.0f64..0.3, w * h).prop_map(move |d| HeightMap::from_data([0.0, 0.0], RES, w, h, d).unwrap())
}

proptest! {
    #[test]
    fn raising_the_terrain_raises_lowest_z(hc in grid(8, 8), bottom in grid(3, 4), delta in 0.0f64..0.5, x in 0usize..6, y in 0usize..5) {
        let z = lowest_z(&hc, &bottom, x, y).unwrap();
        let raised: Vec<f64> = hc.data().iter().map(|v| v + delta).collect();
        let raised = HeightMap::from_data([0.0, 0.0], RES, 8, 8, raised).unwrap();
        let zr = lowest_z(&raised, &bottom, x, y).unwrap();
        // Exact covariance holds once the floor clamp is out of play.
        if z > 0.0 {
            prop_assert!((zr - z - delta).abs() < 1e-12);
        } else {
            prop_assert!(zr <= delta + 1e-12);
        }
    }

    #[test]
    fn placing_never_lowers_a_cell(hc in grid(8, 8), top in grid(3, 4), z in 0.0f64..0.3, x in 0usize..6, y in 0usize..5) {
        let out = update_heightmap(&hc, &top, x, y, z).unwrap();
        for (a, b) in hc.data().iter().zip(out.data()) {
            prop_assert!(b >= a);
        }
        prop_assert_eq!(hc.data().len(), out.data().len());
    }
}
