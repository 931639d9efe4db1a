//! Meshes, rigid transforms, convex hulls, proximity queries and raycast
//! heightmaps.

pub mod hull;
pub mod io;
pub mod mesh;
pub mod query;
pub mod raster;
pub mod transform;

pub use hull::{convex_hull, convex_hull_points};
pub use io::{load_mesh, load_mesh_auto, save_obj, MeshFormat};
pub use mesh::{box_mesh, transform_mesh, Aabb, TriangleMesh};
pub use query::MeshBvh;
pub use raster::{raycast_heightmaps, ObjectHeightmaps, Sampling};
pub use transform::{rotation_rpy, wrap_angle, RigidTransform};
