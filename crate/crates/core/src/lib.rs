//! Causal ordering analysis of dynamical models: equation systems and their bipartite
//! structure, causal ordering and Markov ordering graphs, graphical identification of
//! perfect adaptation, simulation to equilibrium, and rank-based independence testing.

pub mod modelspec;
pub mod graphcore;
pub mod corpus;
pub mod separation;
pub mod adaptation;
pub mod dataset;
pub mod dynsim;
pub mod indep;
