//! Graphical identification of perfect adaptation and intervention effects.

use thiserror::Error;

use crate::graphcore::{
    causal_ordering, causal_ordering_with, extend_matching, markov_ordering, variable_label, BipartiteSystem,
    CausalOrderingGraph, GraphError, MarkovOrderingGraph, Matching, Vertex,
};
use crate::modelspec::{dynamic_system, equilibrium_system, ModelSpec};
use crate::separation::cluster_descendants;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdaptationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the natural labelling does not extend to a perfect matching: {0}")]
    NoNaturalExtension(GraphError),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("unknown equation `{0}`")]
    UnknownEquation(String),
    #[error("equation `{0}` has no naturally labelled variable")]
    NoNaturalCounterpart(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

/// Perfect matching of a dynamic bipartite system that pairs each `g_i` with `v_i`,
/// completed over the static equations.
pub fn natural_matching(b: &BipartiteSystem) -> Result<Matching, AdaptationError> {
    let fixed: Vec<(usize, usize)> = b
        .natural
        .iter()
        .enumerate()
        .filter_map(|(f, v)| v.map(|v| (v, f)))
        .collect();
    extend_matching(b, &fixed).map_err(AdaptationError::NoNaturalExtension)
}

/// Variables with a directed path from `input` in the cluster graph.
pub fn input_reachability(cog: &CausalOrderingGraph, input: &str) -> Result<Vec<usize>, AdaptationError> {
    let i = cog
        .inputs
        .iter()
        .position(|n| n == input)
        .ok_or_else(|| AdaptationError::UnknownInput(input.to_string()))?;
    Ok(cluster_descendants(cog, Vertex::Input(i))?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptationReport {
    pub input: String,
    pub variables: Vec<String>,
    pub transient_reachable: Vec<usize>,
    pub equilibrium_reachable: Vec<usize>,
    pub adapting: Vec<usize>,
    pub natural_matching_ok: bool,
    /// Set when `adapting` is nonempty: the conclusion that those variables respond
    /// transiently assumes a path in the dynamic graph implies an actual response.
    pub assumes_transient_response: bool,
}

impl AdaptationReport {
    pub fn names(&self, set: &[usize]) -> Vec<&str> {
        set.iter().map(|&i| self.variables[i].as_str()).collect()
    }
}

/// Dynamic and equilibrium causal ordering graphs of `m`.
pub fn ordering_graphs(m: &ModelSpec) -> Result<(CausalOrderingGraph, CausalOrderingGraph), AdaptationError> {
    if m.dynamics.is_empty() {
        return Err(AdaptationError::NotApplicable(format!("model `{}` has no dynamics", m.name)));
    }
    let dyn_b = BipartiteSystem::from_system(&dynamic_system(m), m)?;
    let nat = natural_matching(&dyn_b)?;
    let dyn_cog = causal_ordering_with(&dyn_b, &nat)?;
    let eq_b = BipartiteSystem::from_system(&equilibrium_system(m), m)?;
    let eq_cog = causal_ordering(&eq_b).map_err(|e| match e {
        GraphError::NoPerfectMatching { .. } | GraphError::SizeMismatch { .. } => {
            AdaptationError::NotApplicable(format!("equilibrium system: {e}"))
        }
        other => AdaptationError::Graph(other),
    })?;
    Ok((dyn_cog, eq_cog))
}

/// Variables reachable from `input` in the dynamic causal ordering graph but not in
/// the equilibrium one.
pub fn adapting_variables(m: &ModelSpec, input: &str) -> Result<AdaptationReport, AdaptationError> {
    if !m.inputs.iter().any(|i| i.name == input) {
        return Err(AdaptationError::UnknownInput(input.to_string()));
    }
    let (dyn_cog, eq_cog) = ordering_graphs(m)?;
    let transient_reachable = input_reachability(&dyn_cog, input)?;
    let equilibrium_reachable = input_reachability(&eq_cog, input)?;
    let adapting: Vec<usize> = transient_reachable
        .iter()
        .copied()
        .filter(|v| !equilibrium_reachable.contains(v))
        .collect();
    Ok(AdaptationReport {
        input: input.to_string(),
        variables: m.variables.iter().map(|v| v.name.clone()).collect(),
        transient_reachable,
        equilibrium_reachable,
        assumes_transient_response: !adapting.is_empty(),
        adapting,
        natural_matching_ok: true,
    })
}

/// Variables generically affected by a soft intervention on equation `eq`.
pub fn soft_intervention_effects(cog: &CausalOrderingGraph, eq: &str) -> Result<Vec<usize>, AdaptationError> {
    let f = cog
        .equations
        .iter()
        .position(|e| e == eq)
        .ok_or_else(|| AdaptationError::UnknownEquation(eq.to_string()))?;
    Ok(cluster_descendants(cog, Vertex::Equation(f))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    AdaptationDetected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionVerdict {
    pub target_equation: String,
    pub target_variable: String,
    /// The target variable is unaffected by the intervention.
    pub condition1: bool,
    /// Some non-descendant of the target variable is affected.
    pub condition2: bool,
    /// The affected non-descendants.
    pub witnesses: Vec<String>,
    pub conclusion: Conclusion,
}

impl DetectionVerdict {
    pub(crate) fn new(
        target_equation: String,
        target_variable: String,
        condition1: bool,
        witnesses: Vec<String>,
    ) -> Self {
        let condition2 = !witnesses.is_empty();
        let conclusion = if condition1 || condition2 { Conclusion::AdaptationDetected } else { Conclusion::Inconclusive };
        DetectionVerdict { target_equation, target_variable, condition1, condition2, witnesses, conclusion }
    }
}

/// Decides both detection conditions for a soft intervention on equilibrium
/// equation `target` from the graphs alone.
pub fn detect_adaptation_graphside(
    cog: &CausalOrderingGraph,
    mog: &MarkovOrderingGraph,
    target: &str,
) -> Result<DetectionVerdict, AdaptationError> {
    let f = cog
        .equations
        .iter()
        .position(|e| e == target)
        .ok_or_else(|| AdaptationError::UnknownEquation(target.to_string()))?;
    let vi = cog.natural[f].ok_or_else(|| AdaptationError::NoNaturalCounterpart(target.to_string()))?;
    let effects = cluster_descendants(cog, Vertex::Equation(f))?;
    let node = mog
        .variable_node(vi)
        .ok_or_else(|| GraphError::UnknownVertex(variable_label(&cog.variables[vi])))?;
    let desc = mog.descendants(node);
    let witnesses: Vec<String> = effects
        .iter()
        .copied()
        .filter(|&w| w != vi)
        .filter(|&w| mog.variable_node(w).is_some_and(|n| !desc.contains(&n)))
        .map(|w| variable_label(&cog.variables[w]))
        .collect();
    Ok(DetectionVerdict::new(
        target.to_string(),
        variable_label(&cog.variables[vi]),
        !effects.contains(&vi),
        witnesses,
    ))
}

/// Equilibrium causal ordering and Markov ordering graphs of `m`.
pub fn equilibrium_graphs(m: &ModelSpec) -> Result<(CausalOrderingGraph, MarkovOrderingGraph), GraphError> {
    let b = BipartiteSystem::from_system(&equilibrium_system(m), m)?;
    let cog = causal_ordering(&b)?;
    let mog = markov_ordering(&cog);
    Ok((cog, mog))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn adapting(name: &str, input: &str) -> Vec<String> {
        let r = adapting_variables(&corpus::model(name).unwrap(), input).unwrap();
        r.names(&r.adapting).into_iter().map(String::from).collect()
    }

    #[test]
    fn bathtub_outflow_adapts() {
        assert_eq!(adapting("bathtub", "I_K"), vec!["O"]);
    }

    #[test]
    fn natural_matching_of_bathtub() {
        let m = corpus::model("bathtub").unwrap();
        let b = BipartiteSystem::from_system(&dynamic_system(&m), &m).unwrap();
        let nat = natural_matching(&b).unwrap();
        let mut pairs: Vec<(String, String)> = nat
            .pairs()
            .into_iter()
            .map(|(v, f)| (b.variables[v].clone(), b.equations[f].clone()))
            .collect();
        pairs.sort();
        let want = [("D", "g_D"), ("I", "f_I"), ("O", "g_O"), ("P", "g_P")];
        assert_eq!(pairs, want.map(|(a, b)| (a.to_string(), b.to_string())).to_vec());
    }

    #[test]
    fn static_model_natural_matching_equals_perfect_matching() {
        let m = corpus::model("example1").unwrap();
        let b = BipartiteSystem::from_system(&dynamic_system(&m), &m).unwrap();
        assert_eq!(natural_matching(&b).unwrap(), crate::graphcore::perfect_matching(&b).unwrap());
    }

    #[test]
    fn enzyme_dynamic_natural_pairs_only() {
        let m = corpus::model("enzyme").unwrap();
        let b = BipartiteSystem::from_system(&dynamic_system(&m), &m).unwrap();
        let nat = natural_matching(&b).unwrap();
        for (v, f) in nat.pairs() {
            assert_eq!(b.natural[f], Some(v));
        }
    }

    #[test]
    fn raw_enzyme_is_not_applicable() {
        let m = corpus::model("enzyme").unwrap();
        assert!(matches!(adapting_variables(&m, "k_1"), Err(AdaptationError::NotApplicable(_))));
    }

    #[test]
    fn unknown_input_and_equation() {
        let m = corpus::model("bathtub").unwrap();
        assert_eq!(adapting_variables(&m, "nope"), Err(AdaptationError::UnknownInput("nope".into())));
        let (cog, mog) = equilibrium_graphs(&m).unwrap();
        assert!(matches!(soft_intervention_effects(&cog, "f_Q"), Err(AdaptationError::UnknownEquation(_))));
        assert!(matches!(
            detect_adaptation_graphside(&cog, &mog, "f_I"),
            Err(AdaptationError::NoNaturalCounterpart(_))
        ));
    }
}
