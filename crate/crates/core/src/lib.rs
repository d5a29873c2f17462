//! Cycle rank, butterfly minors and the obstruction families for directed
//! treewidth-like width measures.

pub mod coloring;
pub mod cycle_rank;
pub mod decomposition;
pub mod graph;
pub mod io;
pub mod cert;
pub mod chains;
pub mod cli;
pub mod families;
pub mod laced;
pub mod minor;
pub mod search;
pub mod extract;

pub use graph::{Digraph, Edge, GraphError, Path, VertexId};
