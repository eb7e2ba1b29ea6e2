//! Core machinery for embedding transportation-style graphs into
//! distributions over bounded-treewidth graphs.
//!
//! The pipeline goes metric → shortest-path cover ladder → towns
//! decomposition → approximate core hubs → randomized split-tree portal
//! embedding → recursive town embedding with a tree decomposition.

pub mod corehubs;
pub mod embed;
pub mod graph;
pub mod splittree;
pub mod spc;
pub mod tol;
pub mod towns;
pub mod treedecomp;

pub use graph::{build_metric, GraphError, MetricInstance, WeightedGraph};
pub use spc::{CoverLadder, HdConfig, HdVariant};
pub use towns::TownsDecomposition;
