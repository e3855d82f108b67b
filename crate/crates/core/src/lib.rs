//! Layout engine for exploring community-structured networks through four
//! coordinated views: a hyperbolic-style overview miniature, a spherical
//! treemap layout around the viewer, floating 3D community layouts and a
//! floor-projected 2D layout, tied together by a scene state machine with
//! mode-dependent hierarchical edge bundling.

pub mod bundling;
pub mod color;
pub mod community;
pub mod config;
pub mod error;
pub mod force;
pub mod graph;
pub mod io;
pub mod overview;
pub mod scene;
pub mod spherical;
pub mod synth;
pub mod tree;
pub mod treemap;

#[cfg(test)]
pub(crate) mod testutil;

pub use color::Rgba;
pub use error::{Error, Result};
pub use graph::{CommunityId, Edge, EdgeId, Graph, NodeId};
pub use tree::{CommunityTree, HierarchicalGraph};
