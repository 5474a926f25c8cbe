//! Decremental approximate shortest paths built on dynamic neighborhood covers.

pub mod estree;
pub mod expander;
pub mod flowcut;
pub mod apsp;
pub mod cluster;
pub mod cover;
pub mod graph;
pub mod params;
pub mod pseudocut;
pub mod text;

pub use estree::{EsTree, Induced, SsspAnswer, Topology};
pub use graph::{Change, DynGraph, EdgeId, GraphError, Kind, UpdateOp, UpdateReceipt, VertexId, Walk, Weighting, INF};
