//! Treewidth interdiction by spreading-metric LPs and region growing,
//! bounded-size interdiction, and the noisy MIS and MAX-k-SAT pipelines
//! built on them.

pub mod bsi;
pub mod cnf;
pub mod dimacs;
pub mod error;
pub mod gen;
pub mod graph;
pub mod interdict;
pub mod lp;
pub mod oracles;
pub mod pipelines;
pub mod planarity;
pub mod region;
pub mod seplp;
pub mod treedec;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, Graph, Subgraph, VertexId};
