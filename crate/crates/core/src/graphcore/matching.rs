//! Hopcroft-Karp matching with equations on the left, Hall-violator witnesses and
//! exhaustive enumeration of perfect matchings.

use std::collections::VecDeque;

use super::{BipartiteSystem, GraphError};

/// Largest side for which [`enumerate_perfect_matchings`] runs.
pub const MAX_ENUMERATION_SIZE: usize = 12;

/// A matching stored as the matched variable of each equation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    var_of_eq: Vec<Option<usize>>,
    eq_of_var: Vec<Option<usize>>,
}

impl Matching {
    fn from_left(var_of_eq: Vec<Option<usize>>, n_vars: usize) -> Self {
        let mut eq_of_var = vec![None; n_vars];
        for (f, v) in var_of_eq.iter().enumerate() {
            if let Some(v) = *v {
                eq_of_var[v] = Some(f);
            }
        }
        Matching { var_of_eq, eq_of_var }
    }

    /// Builds a matching from `(variable, equation)` pairs.
    pub fn from_pairs(pairs: &[(usize, usize)], n_vars: usize, n_eqs: usize) -> Result<Self, GraphError> {
        let mut var_of_eq = vec![None; n_eqs];
        let mut seen = vec![false; n_vars];
        for &(v, f) in pairs {
            if v >= n_vars || f >= n_eqs {
                return Err(GraphError::InvalidMatching(format!("pair ({v}, {f}) out of range")));
            }
            if seen[v] || var_of_eq[f].is_some() {
                return Err(GraphError::InvalidMatching(format!("pair ({v}, {f}) reuses a vertex")));
            }
            seen[v] = true;
            var_of_eq[f] = Some(v);
        }
        Ok(Matching::from_left(var_of_eq, n_vars))
    }

    pub fn var_of(&self, eq: usize) -> Option<usize> {
        self.var_of_eq.get(eq).copied().flatten()
    }

    pub fn eq_of(&self, var: usize) -> Option<usize> {
        self.eq_of_var.get(var).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.var_of_eq.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matched `(variable, equation)` pairs ordered by equation.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.var_of_eq
            .iter()
            .enumerate()
            .filter_map(|(f, v)| v.map(|v| (v, f)))
            .collect()
    }

    /// Checks that every pair is an edge of `b` and that both sides are covered.
    pub fn validate_perfect(&self, b: &BipartiteSystem) -> Result<(), GraphError> {
        if self.var_of_eq.len() != b.equations.len() || self.eq_of_var.len() != b.variables.len() {
            return Err(GraphError::InvalidMatching("dimensions differ from the graph".into()));
        }
        for (f, v) in self.var_of_eq.iter().enumerate() {
            match v {
                None => {
                    return Err(GraphError::InvalidMatching(format!("equation `{}` is unmatched", b.equations[f])))
                }
                Some(v) if !b.has_edge(*v, f) => {
                    return Err(GraphError::InvalidMatching(format!(
                        "({}, {}) is not an edge",
                        b.variables[*v], b.equations[f]
                    )))
                }
                Some(_) => {}
            }
        }
        if self.eq_of_var.iter().any(|f| f.is_none()) {
            return Err(GraphError::InvalidMatching("a variable is unmatched".into()));
        }
        Ok(())
    }
}

const INF: usize = usize::MAX;

/// Hopcroft-Karp over `adj` (left vertices to ascending right neighbours), starting
/// from an empty matching. Ties go to the lowest index on both sides.
fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut match_l: Vec<Option<usize>> = vec![None; n_left];
    let mut match_r: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![INF; n_left];
    loop {
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..n_left {
            if match_l[u].is_none() {
                augment(u, adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }
    match_l
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [Option<usize>],
    match_r: &mut [Option<usize>],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let ok = match match_r[v] {
            None => true,
            Some(w) => dist[w] == dist[u].wrapping_add(1) && augment(w, adj, match_l, match_r, dist),
        };
        if ok {
            match_l[u] = Some(v);
            match_r[v] = Some(u);
            return true;
        }
    }
    dist[u] = INF;
    false
}

/// A maximum matching of `b`.
pub fn maximum_matching(b: &BipartiteSystem) -> Matching {
    Matching::from_left(hopcroft_karp(&b.adjacency, b.variables.len()), b.variables.len())
}

/// Equations reachable by alternating paths from the first unmatched equation. Their
/// joint neighbourhood is one smaller than the set itself.
fn hall_witness(b: &BipartiteSystem, m: &Matching) -> Vec<usize> {
    let Some(start) = (0..b.equations.len()).find(|&f| m.var_of(f).is_none()) else {
        return Vec::new();
    };
    let mut in_set = vec![false; b.equations.len()];
    let mut seen_var = vec![false; b.variables.len()];
    in_set[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for &v in &b.adjacency[f] {
            if seen_var[v] {
                continue;
            }
            seen_var[v] = true;
            if let Some(g) = m.eq_of(v) {
                if !in_set[g] {
                    in_set[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    (0..b.equations.len()).filter(|&f| in_set[f]).collect()
}

fn no_perfect_matching(b: &BipartiteSystem, m: &Matching) -> GraphError {
    GraphError::NoPerfectMatching {
        size: m.len(),
        witness: hall_witness(b, m).into_iter().map(|f| b.equations[f].clone()).collect(),
    }
}

/// A perfect matching of `b`, deterministic given the vertex order.
pub fn perfect_matching(b: &BipartiteSystem) -> Result<Matching, GraphError> {
    if b.variables.len() != b.equations.len() {
        return Err(GraphError::SizeMismatch { vars: b.variables.len(), eqs: b.equations.len() });
    }
    let m = maximum_matching(b);
    if m.len() < b.equations.len() {
        return Err(no_perfect_matching(b, &m));
    }
    Ok(m)
}

/// Like [`perfect_matching`], but reports a Hall witness also when there are more
/// equations than variables.
pub(crate) fn perfect_matching_or_witness(b: &BipartiteSystem) -> Result<Matching, GraphError> {
    if b.equations.len() > b.variables.len() {
        return Err(no_perfect_matching(b, &maximum_matching(b)));
    }
    perfect_matching(b)
}

/// Completes the fixed `(variable, equation)` pairs to a perfect matching by
/// matching the remaining equations to the remaining variables.
pub fn extend_matching(b: &BipartiteSystem, fixed: &[(usize, usize)]) -> Result<Matching, GraphError> {
    if b.variables.len() != b.equations.len() {
        return Err(GraphError::SizeMismatch { vars: b.variables.len(), eqs: b.equations.len() });
    }
    let base = Matching::from_pairs(fixed, b.variables.len(), b.equations.len())?;
    for &(v, f) in fixed {
        if !b.has_edge(v, f) {
            return Err(GraphError::InvalidMatching(format!(
                "({}, {}) is not an edge",
                b.variables[v], b.equations[f]
            )));
        }
    }
    let residual: Vec<Vec<usize>> = b
        .adjacency
        .iter()
        .enumerate()
        .map(|(f, adj)| {
            if base.var_of(f).is_some() {
                Vec::new()
            } else {
                adj.iter().copied().filter(|&v| base.eq_of(v).is_none()).collect()
            }
        })
        .collect();
    let mut left = hopcroft_karp(&residual, b.variables.len());
    for &(v, f) in fixed {
        left[f] = Some(v);
    }
    let m = Matching::from_left(left, b.variables.len());
    if m.len() < b.equations.len() {
        return Err(no_perfect_matching(b, &m));
    }
    Ok(m)
}

/// All perfect matchings of `b` (at most `limit`), in lexicographic order of the
/// variable assigned to each equation.
pub fn enumerate_perfect_matchings(b: &BipartiteSystem, limit: usize) -> Result<Vec<Matching>, GraphError> {
    let n = b.equations.len();
    if b.variables.len() != n {
        return Err(GraphError::SizeMismatch { vars: b.variables.len(), eqs: n });
    }
    if n > MAX_ENUMERATION_SIZE {
        return Err(GraphError::TooLarge { size: n, max: MAX_ENUMERATION_SIZE });
    }
    let mut out = Vec::new();
    let mut current = vec![None; n];
    let mut used = vec![false; n];
    enumerate_from(b, 0, &mut current, &mut used, limit, &mut out);
    Ok(out)
}

fn enumerate_from(
    b: &BipartiteSystem,
    f: usize,
    current: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    limit: usize,
    out: &mut Vec<Matching>,
) {
    if out.len() >= limit {
        return;
    }
    if f == current.len() {
        out.push(Matching::from_left(current.clone(), b.variables.len()));
        return;
    }
    for &v in &b.adjacency[f] {
        if !used[v] {
            used[v] = true;
            current[f] = Some(v);
            enumerate_from(b, f + 1, current, used, limit, out);
            used[v] = false;
            current[f] = None;
        }
    }
}
