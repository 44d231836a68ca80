//! Orientation by a perfect matching and the causal ordering graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::matching::perfect_matching_or_witness;
use super::{sccs, variable_label, BipartiteSystem, GraphError, Matching, Vertex};

/// Bipartite graph oriented by a perfect matching: matched edges run from the
/// equation to its variable, all other edges from the variable to the equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    /// Arcs in ascending order.
    pub arcs: Vec<(Vertex, Vertex)>,
}

pub fn orient(b: &BipartiteSystem, m: &Matching) -> Result<OrientedGraph, GraphError> {
    m.validate_perfect(b)?;
    let mut arcs = Vec::new();
    for (v, f) in b.edges() {
        if m.var_of(f) == Some(v) {
            arcs.push((Vertex::Equation(f), Vertex::Variable(v)));
        } else {
            arcs.push((Vertex::Variable(v), Vertex::Equation(f)));
        }
    }
    arcs.sort_unstable();
    Ok(OrientedGraph { variables: b.variables.clone(), equations: b.equations.clone(), arcs })
}

/// A cluster of the causal ordering graph; members ascending (variables, then
/// equations, or a single exogenous or input vertex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub members: Vec<Vertex>,
}

impl Cluster {
    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().filter_map(|v| match v {
            Vertex::Variable(i) => Some(*i),
            _ => None,
        })
    }

    pub fn equations(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().filter_map(|v| match v {
            Vertex::Equation(i) => Some(*i),
            _ => None,
        })
    }

    pub fn is_endogenous(&self) -> bool {
        matches!(self.members.first(), Some(Vertex::Variable(_) | Vertex::Equation(_)))
    }
}

/// Directed cluster graph produced by the causal ordering algorithm.
///
/// Endogenous clusters come first in topological order (ties broken by the smallest
/// variable index), followed by exogenous singletons and input singletons in
/// declaration order. Edges run from a vertex to a cluster that does not contain it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalOrderingGraph {
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    pub natural: Vec<Option<usize>>,
    pub exogenous: Vec<String>,
    pub inputs: Vec<String>,
    pub clusters: Vec<Cluster>,
    /// `(source, target cluster)` pairs, ascending.
    pub edges: Vec<(Vertex, usize)>,
    var_cluster: Vec<usize>,
    eq_cluster: Vec<usize>,
}

impl CausalOrderingGraph {
    pub fn cluster_of(&self, v: Vertex) -> Option<usize> {
        let n_endo = self.clusters.len() - self.exogenous.len() - self.inputs.len();
        match v {
            Vertex::Variable(i) => self.var_cluster.get(i).copied(),
            Vertex::Equation(i) => self.eq_cluster.get(i).copied(),
            Vertex::Exogenous(i) => (i < self.exogenous.len()).then_some(n_endo + i),
            Vertex::Input(i) => (i < self.inputs.len()).then_some(n_endo + self.exogenous.len() + i),
        }
    }

    /// Display name: `v_<name>` for variables, the label or symbol otherwise.
    pub fn vertex_name(&self, v: Vertex) -> String {
        match v {
            Vertex::Variable(i) => variable_label(&self.variables[i]),
            Vertex::Equation(i) => self.equations[i].clone(),
            Vertex::Exogenous(i) => self.exogenous[i].clone(),
            Vertex::Input(i) => self.inputs[i].clone(),
        }
    }

    /// Looks a vertex up by display name; a variable may also be given without `v_`.
    pub fn find_vertex(&self, name: &str) -> Option<Vertex> {
        if let Some(i) = self.equations.iter().position(|e| e == name) {
            return Some(Vertex::Equation(i));
        }
        if let Some(i) = self.exogenous.iter().position(|e| e == name) {
            return Some(Vertex::Exogenous(i));
        }
        if let Some(i) = self.inputs.iter().position(|e| e == name) {
            return Some(Vertex::Input(i));
        }
        let plain = name.strip_prefix("v_");
        if let Some(p) = plain {
            if let Some(i) = self.variables.iter().position(|v| v == p) {
                return Some(Vertex::Variable(i));
            }
        }
        self.variables.iter().position(|v| v == name).map(Vertex::Variable)
    }

    /// Successor clusters of each cluster.
    pub fn cluster_successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.clusters.len()];
        for &(src, target) in &self.edges {
            let from = self.cluster_of(src).expect("edge source belongs to a cluster");
            succ[from].push(target);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        succ
    }
}

/// Runs the causal ordering algorithm on `b` with the matching it finds itself.
/// A system with more equations than variables is reported as having no perfect
/// matching, with a Hall witness.
pub fn causal_ordering(b: &BipartiteSystem) -> Result<CausalOrderingGraph, GraphError> {
    let m = perfect_matching_or_witness(b)?;
    causal_ordering_with(b, &m)
}

/// Runs the causal ordering algorithm on `b` with the given perfect matching.
pub fn causal_ordering_with(b: &BipartiteSystem, m: &Matching) -> Result<CausalOrderingGraph, GraphError> {
    m.validate_perfect(b)?;
    let nv = b.variables.len();
    let ne = b.equations.len();
    // Vertices 0..nv are variables, nv..nv+ne equations.
    let mut succ = vec![Vec::new(); nv + ne];
    for (v, f) in b.edges() {
        if m.var_of(f) == Some(v) {
            succ[nv + f].push(v);
        } else {
            succ[v].push(nv + f);
        }
    }
    let comps = sccs(&succ);
    let mut comp_of = vec![0usize; nv + ne];
    for (c, members) in comps.iter().enumerate() {
        for &x in members {
            comp_of[x] = c;
        }
    }
    // Every equation shares a component with its matched variable or both are
    // singletons; either way the variable's component names the cluster.
    let mut group_of_comp: Vec<Option<usize>> = vec![None; comps.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for v in 0..nv {
        let c = comp_of[v];
        let g = *group_of_comp[c].get_or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(v);
    }
    let mut var_group = vec![0usize; nv];
    for (g, vars) in groups.iter().enumerate() {
        for &v in vars {
            var_group[v] = g;
        }
    }
    let eq_group: Vec<usize> = (0..ne)
        .map(|f| var_group[m.var_of(f).expect("perfect matching")])
        .collect();

    let ng = groups.len();
    let mut gsucc: Vec<Vec<usize>> = vec![Vec::new(); ng];
    let mut indeg = vec![0usize; ng];
    for (v, f) in b.edges() {
        let (a, t) = (var_group[v], eq_group[f]);
        if a != t && !gsucc[a].contains(&t) {
            gsucc[a].push(t);
            indeg[t] += 1;
        }
    }
    // Kahn's algorithm; groups are numbered by smallest variable, so the heap key is
    // the group index itself.
    let mut heap: BinaryHeap<Reverse<usize>> = (0..ng).filter(|&g| indeg[g] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(ng);
    while let Some(Reverse(g)) = heap.pop() {
        order.push(g);
        for &t in &gsucc[g] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                heap.push(Reverse(t));
            }
        }
    }
    assert_eq!(order.len(), ng, "cluster graph of a strongly connected decomposition is acyclic");
    let mut rank = vec![0usize; ng];
    for (pos, &g) in order.iter().enumerate() {
        rank[g] = pos;
    }

    let mut clusters: Vec<Cluster> = order
        .iter()
        .map(|&g| {
            let mut members: Vec<Vertex> = groups[g].iter().map(|&v| Vertex::Variable(v)).collect();
            let mut eqs: Vec<usize> = groups[g].iter().map(|&v| m.eq_of(v).expect("perfect matching")).collect();
            eqs.sort_unstable();
            members.extend(eqs.into_iter().map(Vertex::Equation));
            Cluster { members }
        })
        .collect();
    let var_cluster: Vec<usize> = var_group.iter().map(|&g| rank[g]).collect();
    let eq_cluster: Vec<usize> = eq_group.iter().map(|&g| rank[g]).collect();
    let exog_base = clusters.len();
    clusters.extend((0..b.exogenous.len()).map(|i| Cluster { members: vec![Vertex::Exogenous(i)] }));
    let input_base = clusters.len();
    clusters.extend((0..b.inputs.len()).map(|i| Cluster { members: vec![Vertex::Input(i)] }));
    debug_assert_eq!(input_base - exog_base, b.exogenous.len());

    let mut edges = Vec::new();
    for (v, f) in b.edges() {
        if var_cluster[v] != eq_cluster[f] {
            edges.push((Vertex::Variable(v), eq_cluster[f]));
        }
    }
    for (i, att) in b.exogenous_attachments.iter().enumerate() {
        edges.extend(att.iter().map(|&f| (Vertex::Exogenous(i), eq_cluster[f])));
    }
    for (i, att) in b.input_attachments.iter().enumerate() {
        edges.extend(att.iter().map(|&f| (Vertex::Input(i), eq_cluster[f])));
    }
    edges.sort_unstable();
    edges.dedup();

    Ok(CausalOrderingGraph {
        variables: b.variables.clone(),
        equations: b.equations.clone(),
        natural: b.natural.clone(),
        exogenous: b.exogenous.clone(),
        inputs: b.inputs.clone(),
        clusters,
        edges,
        var_cluster,
        eq_cluster,
    })
}
