//! Bipartite equation/variable graphs, perfect matchings, the causal ordering
//! algorithm and the Markov ordering graph derived from it.

mod bipartite;
mod dot;
mod markov;
mod matching;
mod ordering;
mod scc;

pub use bipartite::BipartiteSystem;
pub use dot::{cog_to_csv, cog_to_dot, mog_to_csv, mog_to_dot, oriented_to_dot};
pub use markov::{markov_ordering, MarkovOrderingGraph, MogNode, NodeKind};
pub use matching::{
    enumerate_perfect_matchings, extend_matching, maximum_matching, perfect_matching, Matching,
    MAX_ENUMERATION_SIZE,
};
pub use ordering::{causal_ordering, causal_ordering_with, orient, CausalOrderingGraph, Cluster, OrientedGraph};
pub use scc::sccs;

use std::fmt;

use thiserror::Error;

/// A vertex of a bipartite system or causal ordering graph. Indices refer to the
/// variable, equation, exogenous and input lists of the owning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Variable(usize),
    Equation(usize),
    Exogenous(usize),
    Input(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Variable(i) => write!(f, "var#{i}"),
            Vertex::Equation(i) => write!(f, "eq#{i}"),
            Vertex::Exogenous(i) => write!(f, "exog#{i}"),
            Vertex::Input(i) => write!(f, "input#{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("{vars} variables but {eqs} equations")]
    SizeMismatch { vars: usize, eqs: usize },
    #[error("no perfect matching (maximum matching has size {size}); equations {witness:?} jointly contain fewer variables than equations")]
    NoPerfectMatching { size: usize, witness: Vec<String> },
    #[error("equation `{0}` contains no endogenous variable")]
    DegenerateEquation(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("perfect matching enumeration is limited to {max} vertices per side, got {size}")]
    TooLarge { size: usize, max: usize },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex sets are not disjoint")]
    NonDisjointSets,
    #[error("empty vertex set in separation query")]
    EmptySet,
}

/// Display name of variable `name` in graphs.
pub fn variable_label(name: &str) -> String {
    format!("v_{name}")
}
