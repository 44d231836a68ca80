//! Markov ordering graph over endogenous, exogenous and input vertices.

use super::{variable_label, CausalOrderingGraph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Variable(usize),
    Exogenous(usize),
    Input(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MogNode {
    pub name: String,
    pub kind: NodeKind,
}

/// DAG with nodes ordered as variables, exogenous symbols, then inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovOrderingGraph {
    pub nodes: Vec<MogNode>,
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
}

impl MarkovOrderingGraph {
    /// Graph over named nodes with the given `(parent, child)` edges. Used for
    /// synthetic DAGs; all nodes are treated as variables.
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let nodes = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| MogNode { name, kind: NodeKind::Variable(i) })
            .collect();
        Self::build(nodes, edges)
    }

    fn build(nodes: Vec<MogNode>, edges: &[(usize, usize)]) -> Self {
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        for &(a, b) in edges {
            children[a].push(b);
            parents[b].push(a);
        }
        for l in children.iter_mut().chain(parents.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        MarkovOrderingGraph { nodes, children, parents }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// All `(parent, child)` edges, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(a, cs)| cs.iter().map(move |&b| (a, b)))
            .collect()
    }

    /// Node by display name; a variable may also be given without `v_`.
    pub fn find(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.nodes.iter().position(|n| n.name == name) {
            return Some(i);
        }
        let prefixed = variable_label(name);
        self.nodes
            .iter()
            .position(|n| matches!(n.kind, NodeKind::Variable(_)) && n.name == prefixed)
    }

    /// Node of endogenous variable `i`.
    pub fn variable_node(&self, i: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == NodeKind::Variable(i))
    }

    /// Nodes reachable from `v` by a directed path, excluding `v`.
    pub fn descendants(&self, v: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &c in &self.children[x] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        (0..self.len()).filter(|&i| seen[i] && i != v).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut stack: Vec<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(x) = stack.pop() {
            seen += 1;
            for &c in &self.children[x] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    stack.push(c);
                }
            }
        }
        seen == self.len()
    }
}

/// Replaces every edge from a vertex into a cluster by edges into each variable of
/// that cluster.
pub fn markov_ordering(cog: &CausalOrderingGraph) -> MarkovOrderingGraph {
    let nv = cog.variables.len();
    let nx = cog.exogenous.len();
    let mut nodes: Vec<MogNode> = cog
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| MogNode { name: variable_label(v), kind: NodeKind::Variable(i) })
        .collect();
    nodes.extend(
        cog.exogenous
            .iter()
            .enumerate()
            .map(|(i, x)| MogNode { name: x.clone(), kind: NodeKind::Exogenous(i) }),
    );
    nodes.extend(
        cog.inputs
            .iter()
            .enumerate()
            .map(|(i, x)| MogNode { name: x.clone(), kind: NodeKind::Input(i) }),
    );
    let mut edges = Vec::new();
    for &(src, target) in &cog.edges {
        let from = match src {
            Vertex::Variable(i) => i,
            Vertex::Exogenous(i) => nv + i,
            Vertex::Input(i) => nv + nx + i,
            Vertex::Equation(_) => continue,
        };
        edges.extend(cog.clusters[target].variables().map(|w| (from, w)));
    }
    MarkovOrderingGraph::build(nodes, &edges)
}
