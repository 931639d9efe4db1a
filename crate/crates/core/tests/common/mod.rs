//! Shared scenarios for the integration tests.
#![allow(dead_code)]

pub mod oracles;

use stackpack::items::{generate_test_items, ItemKind, ItemParams};
use stackpack::planner::{PackItem, SearchConfig};
use stackpack::{Container, TriangleMesh};

pub struct Scenario {
    pub items: Vec<PackItem>,
    pub container: Container,
    pub sequence: Vec<usize>,
    pub config: SearchConfig,
}

pub fn item(name: &str, kind: ItemKind, params: ItemParams) -> PackItem {
    PackItem::new(name, generate_test_items(kind, &params, 0).unwrap())
}

pub fn block(name: &str, x: f64, y: f64, z: f64) -> PackItem {
    item(name, ItemKind::Box, ItemParams::sized(x, y, z))
}

pub fn bowl() -> ItemParams {
    ItemParams {
        wall: Some(0.01),
        taper: 0.6,
        segments: 32,
        ..ItemParams::sized(0.2, 0.2, 0.06)
    }
}

/// Three bowls and a flat box. The box only fits on the floor, which has
/// room for it only if the bowls are stacked inside each other.
pub fn bowls(heuristic: stackpack::heuristics::Heuristic) -> Scenario {
    let items = vec![
        item("bowl-a", ItemKind::Bowl, bowl()),
        item("bowl-b", ItemKind::Bowl, bowl()),
        item("bowl-c", ItemKind::Bowl, bowl()),
        block("slab", 0.18, 0.18, 0.06),
    ];
    let meshes: Vec<TriangleMesh> = items.iter().map(|i| i.mesh.clone()).collect();
    Scenario {
        sequence: stackpack::planner::sequence_items(&meshes),
        items,
        container: Container::new(0.41, 0.205, 0.11).unwrap(),
        config: SearchConfig {
            heuristic,
            c: 0.01,
            ..Default::default()
        },
    }
}

/// A plank that cannot rest on the first block alone, but bridges the
/// first and last blocks once both are in. Walls are frictionless so the
/// plank cannot hang from them.
pub fn retry() -> Scenario {
    let mut container = Container::new(0.3, 0.104, 0.17).unwrap();
    container.mu_wall = Some(0.0);
    Scenario {
        items: vec![block("cube", 0.08, 0.08, 0.08), block("plank", 0.28, 0.1, 0.04), block("block", 0.17, 0.1, 0.08)],
        container,
        sequence: vec![0, 1, 2],
        config: SearchConfig::default(),
    }
}

/// A ramp followed by a plank longer than the container: the plank only
/// fits lying tilted on the ramp.
pub fn wedge_slot() -> Scenario {
    Scenario {
        items: vec![
            item("ramp", ItemKind::Wedge, ItemParams::sized(0.18, 0.1, 0.18)),
            block("plank", 0.25, 0.1, 0.02),
        ],
        container: Container::new(0.2, 0.11, 0.22).unwrap(),
        sequence: vec![0, 1],
        config: SearchConfig::default(),
    }
}
