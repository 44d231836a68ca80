//! Dynamic and equilibrium equation systems with their variable incidence.

use super::expr::Expr;
use super::{ModelSpec, SymbolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Dynamic,
    Equilibrium,
}

/// Where an equation came from. `var` is the index of the naturally labelled variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationRole {
    Static,
    Dynamic { var: usize },
    Equilibrium { var: usize, overridden: bool },
    Invariant,
}

impl EquationRole {
    pub fn natural_variable(&self) -> Option<usize> {
        match *self {
            EquationRole::Dynamic { var } | EquationRole::Equilibrium { var, .. } => Some(var),
            EquationRole::Static | EquationRole::Invariant => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub label: String,
    /// For dynamic equations this is the right-hand side `h_i` of `dX_i/dt = h_i`;
    /// otherwise the residual that must vanish.
    pub residual: Expr,
    pub role: EquationRole,
    /// Endogenous variable indices in ascending order.
    pub incidence: Vec<usize>,
    /// Exogenous and input symbols occurring in the residual, in order of first occurrence.
    pub parameters: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSystem {
    pub kind: SystemKind,
    pub variables: Vec<String>,
    pub equations: Vec<Equation>,
}

impl EquationSystem {
    pub fn equation(&self, label: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.label == label)
    }

    /// Incidence of `label` as variable names.
    pub fn incidence_names(&self, label: &str) -> Option<Vec<&str>> {
        self.equation(label)
            .map(|e| e.incidence.iter().map(|&i| self.variables[i].as_str()).collect())
    }
}

fn make_equation(m: &ModelSpec, label: String, residual: Expr, role: EquationRole, forced: Option<usize>) -> Equation {
    let mut incidence: Vec<usize> = Vec::new();
    let mut parameters = Vec::new();
    for s in residual.symbols() {
        match m.symbol_kind(s) {
            Some(SymbolKind::Variable) => incidence.push(m.variable_index(s).expect("declared variable")),
            Some(SymbolKind::Exogenous | SymbolKind::Input) => parameters.push(s.to_string()),
            Some(SymbolKind::Constant) | None => {}
        }
    }
    if let Some(v) = forced {
        incidence.push(v);
    }
    incidence.sort_unstable();
    incidence.dedup();
    Equation { label, residual, role, incidence, parameters }
}

fn statics(m: &ModelSpec) -> impl Iterator<Item = Equation> + '_ {
    m.statics
        .iter()
        .map(|s| make_equation(m, s.label.clone(), s.residual.clone(), EquationRole::Static, None))
}

/// Statics plus one equation `g_i` per dynamics entry; `g_i` always contains `v_i`.
pub fn dynamic_system(m: &ModelSpec) -> EquationSystem {
    let mut equations: Vec<Equation> = statics(m).collect();
    for d in &m.dynamics {
        let var = m.variable_index(&d.var).expect("validated model");
        equations.push(make_equation(
            m,
            ModelSpec::dynamic_label(&d.var),
            d.rhs.clone(),
            EquationRole::Dynamic { var },
            Some(var),
        ));
    }
    EquationSystem { kind: SystemKind::Dynamic, variables: names(m), equations }
}

/// Statics, one equilibrium equation per dynamics entry (the override if present,
/// otherwise `h_i = 0`), and the invariants. Incidence is purely syntactic.
pub fn equilibrium_system(m: &ModelSpec) -> EquationSystem {
    let mut equations: Vec<Equation> = statics(m).collect();
    for d in &m.dynamics {
        let var = m.variable_index(&d.var).expect("validated model");
        let (residual, overridden) = match m.override_for(&d.var) {
            Some(o) => (o.residual.clone(), true),
            None => (d.rhs.clone(), false),
        };
        equations.push(make_equation(
            m,
            m.equilibrium_label(&d.var),
            residual,
            EquationRole::Equilibrium { var, overridden },
            None,
        ));
    }
    for s in &m.invariants {
        equations.push(make_equation(m, s.label.clone(), s.residual.clone(), EquationRole::Invariant, None));
    }
    EquationSystem { kind: SystemKind::Equilibrium, variables: names(m), equations }
}

fn names(m: &ModelSpec) -> Vec<String> {
    m.variables.iter().map(|v| v.name.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspec::parse_model;

    #[test]
    fn constant_rate_has_only_the_forced_edge() {
        let m = parse_model("model m\nconst c = 2\nvar x\ndyn x: c\n").unwrap();
        let sys = dynamic_system(&m);
        assert_eq!(sys.incidence_names("g_x").unwrap(), vec!["x"]);
        let eq = equilibrium_system(&m);
        assert!(eq.equations[0].incidence.is_empty());
    }

    #[test]
    fn parameters_are_collected() {
        let m = parse_model("model m\ninput u\nexog w ~ constant(1)\nconst k = 1\nvar x\ndyn x: u*k - w*x\n").unwrap();
        let sys = equilibrium_system(&m);
        assert_eq!(sys.equations[0].parameters, vec!["u".to_string(), "w".to_string()]);
    }
}
