//! Graph window analytics.
//!
//! For every vertex `v` of a graph, a window query aggregates a vertex
//! attribute over a window of vertices determined by the graph structure:
//! the k-hop neighbourhood of `v`, or (on a DAG) `v` together with all of its
//! ancestors. Two indices share aggregation work between overlapping windows:
//!
//! - [`dbindex::DbIndex`] covers every window with disjoint blocks so that
//!   partial aggregates of blocks shared by many windows are computed once.
//! - [`iindex::IIndex`] exploits window containment on DAGs: each vertex
//!   inherits the aggregate of its closest parent and only folds in the
//!   difference.
//!
//! [`window::evaluate_nonindexed`] recomputes each window from scratch and is
//! the reference every index is tested against.

pub mod aggregate;
pub mod codec;
pub mod dbindex;
mod error;
pub mod graph;
pub mod iindex;
pub mod window;

pub use aggregate::{AggregateFunction, AggregateSpec, AggregateValue, PartialAggregate, ResultTable};
pub use error::{Error, Result};
pub use graph::{AttributeTable, Direction, Directedness, Graph, VertexSet};
pub use window::{evaluate_nonindexed, WindowSpec};
