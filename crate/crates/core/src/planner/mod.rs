//! Placement search, constraint checks and the packing pipeline.

mod config;
mod pack;
mod search;

pub use config::SearchConfig;
pub use pack::{
    all_perturbed, base_orientations, commit, pack_all, pack_all_with, pack_one_item, sequence_items, PackFailure,
    PackItem, PackOutcome, PackedState, Placement, SearchStats,
};
pub use search::{candidates_for, grid_search_3d, orient_item, search, Orientation, OrientedItem, SearchOutput};
