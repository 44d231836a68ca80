//! Undirected bipartite graph between endogenous variables and equations.

use super::GraphError;
use crate::modelspec::{EquationSystem, ModelSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteSystem {
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    /// Variables of each equation, ascending.
    pub adjacency: Vec<Vec<usize>>,
    /// Naturally labelled variable of each equation, if any.
    pub natural: Vec<Option<usize>>,
    pub exogenous: Vec<String>,
    pub inputs: Vec<String>,
    /// Equations each exogenous symbol occurs in, ascending.
    pub exogenous_attachments: Vec<Vec<usize>>,
    /// Equations each input occurs in, ascending.
    pub input_attachments: Vec<Vec<usize>>,
}

impl BipartiteSystem {
    /// Plain bipartite graph without exogenous or input vertices.
    pub fn new(variables: Vec<String>, equations: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adjacency = vec![Vec::new(); equations.len()];
        for &(v, f) in edges {
            if v >= variables.len() {
                return Err(GraphError::UnknownVertex(format!("variable #{v}")));
            }
            if f >= equations.len() {
                return Err(GraphError::UnknownVertex(format!("equation #{f}")));
            }
            adjacency[f].push(v);
        }
        for (f, adj) in adjacency.iter_mut().enumerate() {
            adj.sort_unstable();
            adj.dedup();
            if adj.is_empty() {
                return Err(GraphError::DegenerateEquation(equations[f].clone()));
            }
        }
        let natural = vec![None; equations.len()];
        Ok(BipartiteSystem {
            variables,
            equations,
            adjacency,
            natural,
            exogenous: Vec::new(),
            inputs: Vec::new(),
            exogenous_attachments: Vec::new(),
            input_attachments: Vec::new(),
        })
    }

    /// Builds the bipartite graph of `sys`, attaching the exogenous symbols and inputs
    /// of `model` to the equations they occur in.
    pub fn from_system(sys: &EquationSystem, model: &ModelSpec) -> Result<Self, GraphError> {
        for eq in &sys.equations {
            if eq.incidence.is_empty() {
                return Err(GraphError::DegenerateEquation(eq.label.clone()));
            }
        }
        let attach = |name: &str| -> Vec<usize> {
            sys.equations
                .iter()
                .enumerate()
                .filter(|(_, e)| e.parameters.iter().any(|p| p == name))
                .map(|(i, _)| i)
                .collect()
        };
        Ok(BipartiteSystem {
            variables: sys.variables.clone(),
            equations: sys.equations.iter().map(|e| e.label.clone()).collect(),
            adjacency: sys.equations.iter().map(|e| e.incidence.clone()).collect(),
            natural: sys.equations.iter().map(|e| e.role.natural_variable()).collect(),
            exogenous: model.exogenous.iter().map(|e| e.name.clone()).collect(),
            inputs: model.inputs.iter().map(|i| i.name.clone()).collect(),
            exogenous_attachments: model.exogenous.iter().map(|e| attach(&e.name)).collect(),
            input_attachments: model.inputs.iter().map(|i| attach(&i.name)).collect(),
        })
    }

    pub fn has_edge(&self, v: usize, f: usize) -> bool {
        self.adjacency.get(f).is_some_and(|a| a.binary_search(&v).is_ok())
    }

    /// All `(variable, equation)` edges ordered by equation, then variable.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(f, adj)| adj.iter().map(move |&v| (v, f)))
            .collect()
    }

    pub fn equation_index(&self, label: &str) -> Option<usize> {
        self.equations.iter().position(|e| e == label)
    }
}
