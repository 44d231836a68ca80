//! Cluster-graph reachability and d-separation.

use std::collections::VecDeque;

use crate::graphcore::{CausalOrderingGraph, GraphError, MarkovOrderingGraph, Vertex};

/// Variables reachable from the cluster of `source` (inclusive) in the cluster graph,
/// ascending.
pub fn cluster_descendants(cog: &CausalOrderingGraph, source: Vertex) -> Result<Vec<usize>, GraphError> {
    let start = cog
        .cluster_of(source)
        .ok_or_else(|| GraphError::UnknownVertex(source.to_string()))?;
    Ok(descendants_of_cluster(cog, start))
}

/// Variables in cluster `start` and every cluster reachable from it, ascending.
pub fn descendants_of_cluster(cog: &CausalOrderingGraph, start: usize) -> Vec<usize> {
    let succ = cog.cluster_successors();
    let mut seen = vec![false; cog.clusters.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for &d in &succ[c] {
            if !seen[d] {
                seen[d] = true;
                queue.push_back(d);
            }
        }
    }
    let mut vars: Vec<usize> = (0..cog.clusters.len())
        .filter(|&c| seen[c])
        .flat_map(|c| cog.clusters[c].variables().collect::<Vec<_>>())
        .collect();
    vars.sort_unstable();
    vars
}

/// Three disjoint node sets of a Markov ordering graph; `a` and `b` nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub z: Vec<usize>,
}

impl SeparationQuery {
    pub fn new(mog: &MarkovOrderingGraph, a: &[usize], b: &[usize], z: &[usize]) -> Result<Self, GraphError> {
        if a.is_empty() || b.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let mut member = vec![0u8; mog.len()];
        for (set, bit) in [(a, 1u8), (b, 2), (z, 4)] {
            for &v in set {
                if v >= mog.len() {
                    return Err(GraphError::UnknownVertex(format!("#{v}")));
                }
                if member[v] & !bit != 0 {
                    return Err(GraphError::NonDisjointSets);
                }
                member[v] |= bit;
            }
        }
        Ok(SeparationQuery { a: a.to_vec(), b: b.to_vec(), z: z.to_vec() })
    }

    /// Resolves node names (variables with or without `v_`).
    pub fn from_names(mog: &MarkovOrderingGraph, a: &[&str], b: &[&str], z: &[&str]) -> Result<Self, GraphError> {
        let resolve = |names: &[&str]| -> Result<Vec<usize>, GraphError> {
            names
                .iter()
                .map(|n| mog.find(n).ok_or_else(|| GraphError::UnknownVertex(n.to_string())))
                .collect()
        };
        Self::new(mog, &resolve(a)?, &resolve(b)?, &resolve(z)?)
    }
}

/// Whether `q.a` and `q.b` are d-separated given `q.z`, decided by reachability in the
/// moralised graph of the ancestors of `a ∪ b ∪ z` with `z` removed.
pub fn d_separated(mog: &MarkovOrderingGraph, q: &SeparationQuery) -> bool {
    let n = mog.len();
    let mut ancestral = vec![false; n];
    let mut stack: Vec<usize> = q.a.iter().chain(&q.b).chain(&q.z).copied().collect();
    for &v in &stack {
        ancestral[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &p in mog.parents(v) {
            if !ancestral[p] {
                ancestral[p] = true;
                stack.push(p);
            }
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| ancestral[v]) {
        let ps = mog.parents(v);
        for (k, &p) in ps.iter().enumerate() {
            adj[p].push(v);
            adj[v].push(p);
            for &p2 in &ps[k + 1..] {
                adj[p].push(p2);
                adj[p2].push(p);
            }
        }
    }
    let mut blocked = vec![false; n];
    for &v in &q.z {
        blocked[v] = true;
    }
    let mut target = vec![false; n];
    for &v in &q.b {
        target[v] = true;
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = q.a.iter().copied().collect();
    for &v in &q.a {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if target[v] {
            return false;
        }
        for &w in &adj[v] {
            if !seen[w] && !blocked[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

/// One row of [`implied_independences`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Independence {
    pub i: usize,
    pub j: usize,
    pub given: Vec<usize>,
    pub separated: bool,
}

/// Every pair of `vars` (in list order) against every conditioning subset of the
/// remaining `vars` with at most `max_cond` elements, smallest sets first.
pub fn implied_independences(mog: &MarkovOrderingGraph, vars: &[usize], max_cond: usize) -> Vec<Independence> {
    let mut out = Vec::new();
    let max_cond = max_cond.min(vars.len().saturating_sub(2));
    for size in 0..=max_cond {
        for (x, &i) in vars.iter().enumerate() {
            for &j in &vars[x + 1..] {
                let rest: Vec<usize> = vars.iter().copied().filter(|&v| v != i && v != j).collect();
                for given in subsets(&rest, size) {
                    let q = SeparationQuery { a: vec![i], b: vec![j], z: given.clone() };
                    out.push(Independence { i, j, given, separated: d_separated(mog, &q) });
                }
            }
        }
    }
    out
}

/// Subsets of `items` of exactly `k` elements, in lexicographic index order.
pub(crate) fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in start..items.len() {
            cur.push(items[p]);
            go(items, k, p + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}
