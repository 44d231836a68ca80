//! Model descriptions: the `.com` DSL, expression evaluation, and the dynamic and
//! equilibrium equation systems derived from a model.

mod expr;
mod parser;
mod system;

pub use expr::{eval_expr, BinOp, EvalError, Expr, Func, Program};
pub use parser::{parse_model, ParseError};
pub use system::{dynamic_system, equilibrium_system, Equation, EquationRole, EquationSystem, SystemKind};

use std::fmt;

/// Default initial value for variables without an explicit one.
pub const DEFAULT_INITIAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Constant(f64),
    Uniform(f64, f64),
}

impl Distribution {
    /// Value used for deterministic runs: the constant, or the midpoint of the interval.
    pub fn nominal(&self) -> f64 {
        match *self {
            Distribution::Constant(c) => c,
            Distribution::Uniform(lo, hi) => 0.5 * (lo + hi),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Constant(c) => write!(f, "constant({c})"),
            Distribution::Uniform(lo, hi) => write!(f, "uniform({lo}, {hi})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Variable,
    Input,
    Exogenous,
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub initial: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub name: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exogenous {
    pub name: String,
    pub dist: Distribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub name: String,
    pub value: f64,
}

/// `dX/dt = rhs` for variable `var`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub var: String,
    pub rhs: Expr,
}

/// A labelled residual `expr = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledEquation {
    pub label: String,
    pub residual: Expr,
}

/// Replacement equilibrium residual for a variable that has dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub var: String,
    pub label: Option<String>,
    pub residual: Expr,
}

/// A parsed and validated model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub variables: Vec<Variable>,
    pub inputs: Vec<Input>,
    pub exogenous: Vec<Exogenous>,
    pub constants: Vec<Constant>,
    pub dynamics: Vec<Dynamics>,
    pub statics: Vec<LabelledEquation>,
    pub overrides: Vec<Override>,
    /// Equilibrium-only constraints (conservation relations and the like).
    pub invariants: Vec<LabelledEquation>,
}

impl ModelSpec {
    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn symbol_kind(&self, name: &str) -> Option<SymbolKind> {
        if self.variables.iter().any(|v| v.name == name) {
            Some(SymbolKind::Variable)
        } else if self.inputs.iter().any(|v| v.name == name) {
            Some(SymbolKind::Input)
        } else if self.exogenous.iter().any(|v| v.name == name) {
            Some(SymbolKind::Exogenous)
        } else if self.constants.iter().any(|v| v.name == name) {
            Some(SymbolKind::Constant)
        } else {
            None
        }
    }

    pub fn dynamics_for(&self, var: &str) -> Option<&Dynamics> {
        self.dynamics.iter().find(|d| d.var == var)
    }

    pub fn override_for(&self, var: &str) -> Option<&Override> {
        self.overrides.iter().find(|o| o.var == var)
    }

    /// Label of the dynamic equation of `var`.
    pub fn dynamic_label(var: &str) -> String {
        format!("g_{var}")
    }

    /// Label of the equilibrium equation of `var`, honouring an explicit override label.
    pub fn equilibrium_label(&self, var: &str) -> String {
        match self.override_for(var).and_then(|o| o.label.clone()) {
            Some(l) => l,
            None => format!("f_{var}"),
        }
    }

    /// Nominal value of a parameter (input default, exogenous nominal, or constant).
    pub fn nominal_value(&self, name: &str) -> Option<f64> {
        if let Some(i) = self.inputs.iter().find(|i| i.name == name) {
            return i.value;
        }
        if let Some(e) = self.exogenous.iter().find(|e| e.name == name) {
            return Some(e.dist.nominal());
        }
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    /// Returns a copy where `name` (a constant, input or exogenous symbol) is an
    /// exogenous variable with distribution `dist`. Used to randomise a parameter
    /// for sampling experiments.
    pub fn with_exogenous(&self, name: &str, dist: Distribution) -> Option<ModelSpec> {
        let mut m = self.clone();
        match m.symbol_kind(name)? {
            SymbolKind::Variable => return None,
            SymbolKind::Exogenous => {
                m.exogenous.iter_mut().find(|e| e.name == name)?.dist = dist;
            }
            SymbolKind::Constant => {
                m.constants.retain(|c| c.name != name);
                m.exogenous.push(Exogenous { name: name.to_string(), dist });
            }
            SymbolKind::Input => {
                m.inputs.retain(|c| c.name != name);
                m.exogenous.push(Exogenous { name: name.to_string(), dist });
            }
        }
        Some(m)
    }
}

fn write_names<T>(f: &mut fmt::Formatter<'_>, kw: &str, items: &[T], name: impl Fn(&T) -> (&str, Option<f64>)) -> fmt::Result {
    for it in items {
        let (n, v) = name(it);
        match v {
            Some(v) => writeln!(f, "{kw} {n} = {v}")?,
            None => writeln!(f, "{kw} {n}")?,
        }
    }
    Ok(())
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {}", self.name)?;
        write_names(f, "input", &self.inputs, |i| (&i.name, i.value))?;
        for e in &self.exogenous {
            writeln!(f, "exog {} ~ {}", e.name, e.dist)?;
        }
        for c in &self.constants {
            writeln!(f, "const {} = {}", c.name, c.value)?;
        }
        write_names(f, "var", &self.variables, |v| (&v.name, v.initial))?;
        for s in &self.statics {
            writeln!(f, "static {}: {} = 0", s.label, s.residual)?;
        }
        for d in &self.dynamics {
            writeln!(f, "dyn {}: {}", d.var, d.rhs)?;
        }
        for o in &self.overrides {
            match &o.label {
                Some(l) => writeln!(f, "eq {} as {}: {} = 0", o.var, l, o.residual)?,
                None => writeln!(f, "eq {}: {} = 0", o.var, o.residual)?,
            }
        }
        for s in &self.invariants {
            writeln!(f, "invariant {}: {} = 0", s.label, s.residual)?;
        }
        Ok(())
    }
}
