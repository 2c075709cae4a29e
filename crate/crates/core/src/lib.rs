//! Flow decomposition of cyclic s-t graphs into weighted walks.
//!
//! The crate builds mixed-integer models for three decomposition objectives
//! (exact flow decomposition, least absolute errors, minimum path error) and
//! shrinks them before solving: safe sequences found from the two dominator
//! trees of the graph are pinned to distinct walks, edges that cannot precede,
//! follow or interleave those sequences are fixed to zero, and edges between
//! strongly connected components become binary.
//!
//! Module map:
//! - [`graph`]: s-t graphs, text format, condensation, reachability, transforms
//! - [`dominators`]: s- and t-dominator trees, `dom`, extensions
//! - [`safety`]: blue-dominator trees and maximal safe sequences
//! - [`widths`]: maximum-weight edge antichains and minimum walk covers
//! - [`solver`]: backend-neutral MILP model, HiGHS and exhaustive backends
//! - [`milp`]: walk encoding, product linearization, subset constraints, fixing
//! - [`models`]: k-FD, min flow decomposition, k-LAE, k-MPE, walk extraction
//! - [`generator`] and [`bench`]: synthetic de Bruijn instances and the speedup harness

pub mod bench;
pub mod dominators;
pub mod generator;
pub mod graph;
pub mod milp;
pub mod models;
pub mod safety;
pub mod solver;
pub mod widths;

#[doc(hidden)]
pub mod testutil;

pub use graph::{build_graph, parse_graph, EdgeId, Graph, GraphError, VertexId};
