//! Constructive 3D packing of irregular rigid items into an open-top box.
//!
//! Items are placed one at a time on a heightmap of the container. Each
//! placement must be collision free, inside the container, statically
//! stable, and reachable by a top-down gripper.

pub mod container;
pub mod error;
pub mod export;
pub mod geometry;
pub mod heightmap;
pub mod heuristics;
pub mod items;
pub mod lp;
pub mod manipulation;
pub mod orientation;
pub mod plan;
pub mod planner;
pub mod request;
pub mod stability;
pub mod validate;

pub use container::Container;
pub use error::{Error, Result};
pub use geometry::{RigidTransform, TriangleMesh};
pub use heightmap::HeightMap;
pub use plan::{Fallback, PackingPlan, PlanStep};
pub use planner::{pack_all, PackItem, PackOutcome, SearchConfig};
