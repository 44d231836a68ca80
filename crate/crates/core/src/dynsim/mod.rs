//! Fixed-step RK4 simulation of model dynamics, equilibrium search, switch
//! experiments and seeded equilibrium sampling.
//!
//! Variables without dynamics are algebraic: they are recomputed from their static
//! equations at every right-hand-side evaluation by scalar Newton iteration, in
//! causal order. Each static equation must form a cluster of its own with exactly
//! one algebraic variable in the dynamic causal ordering graph.

mod experiment;
mod sample;

pub use experiment::{soft_intervention_experiment, step_response, SwitchReport, VariableResponse};
pub use sample::{mix_seed, sample_equilibria, sample_equilibria_with, InitialState, SampleConfig};

use std::collections::HashMap;

use thiserror::Error;

use crate::adaptation::natural_matching;
use crate::graphcore::{causal_ordering_with, BipartiteSystem, Vertex};
use crate::modelspec::{dynamic_system, BinOp, EvalError, Expr, ModelSpec, Program, DEFAULT_INITIAL};

/// Parameter values by name (inputs, exogenous symbols or constants). Missing names
/// take their nominal value.
pub type Bindings = HashMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Equilibrium is declared once `max |dX/dt|` stays below this for
    /// [`SETTLE_STEPS`] consecutive steps.
    pub eq_tol: f64,
    pub integrator: Integrator,
    /// Spacing of recorded trace rows; `0` records every step.
    pub record_interval: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-3, t_max: 1e4, eq_tol: 1e-9, integrator: Integrator::Rk4, record_interval: 0.1 }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.eq_tol > 0.0) {
            return Err(SimError::InvalidConfig(format!("eq_tol must be positive, got {}", self.eq_tol)));
        }
        if !(self.t_max >= 0.0) {
            return Err(SimError::InvalidConfig(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        Ok(())
    }

    fn record_stride(&self) -> usize {
        ((self.record_interval / self.dt).round() as usize).max(1)
    }
}

/// Consecutive small-derivative steps required for equilibrium.
pub const SETTLE_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("inconsistent statics: {0}")]
    InconsistentStatics(String),
    #[error("static equation `{label}` could not be solved at t = {t}")]
    StaticSolveFailed { label: String, t: f64 },
    #[error("no equilibrium by t = {t} (max |dX/dt| = {residual:e})")]
    NoConvergence { t: f64, residual: f64 },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("initial state has {got} values, expected {expected}")]
    BadInitialState { got: usize, expected: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{} of the samples failed (first: sample {}: {first})", failed.len(), failed[0])]
    SampleFailures { failed: Vec<usize>, first: Box<SimError> },
}

/// Piecewise-constant input schedule: `(time, input, value)` changes applied at the
/// first step starting at or after `time`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputSchedule {
    pub changes: Vec<(f64, String, f64)>,
}

/// States of all endogenous variables over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub variables: Vec<String>,
    pub inputs: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub input_values: Vec<Vec<f64>>,
}

impl Trace {
    fn new(variables: Vec<String>, inputs: Vec<String>) -> Self {
        Trace { variables, inputs, times: Vec::new(), states: Vec::new(), input_values: Vec::new() }
    }

    /// Header `t`, variables, inputs; values with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for n in self.variables.iter().chain(&self.inputs) {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            s.push_str(&format!("{t:.16e}"));
            for v in self.states[k].iter().chain(&self.input_values[k]) {
                s.push_str(&format!(",{v:.16e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Result of [`find_equilibrium`].
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Values of all endogenous variables.
    pub state: Vec<f64>,
    pub time: f64,
    /// `max |dX/dt|` at the final state.
    pub derivative_norm: f64,
    /// Equilibrium-only equations (approximations, invariants) that the state does
    /// not satisfy well.
    pub warnings: Vec<String>,
}

/// Compiled form of an equilibrium-only equation used for the residual check.
#[derive(Debug, Clone)]
struct GuardEquation {
    label: String,
    residual: Program,
    terms: Vec<Program>,
}

/// A model compiled against a flat slot array: variables, then inputs, exogenous
/// symbols and constants in declaration order.
#[derive(Debug, Clone)]
pub struct Simulator {
    variables: Vec<String>,
    inputs: Vec<String>,
    slot_of: HashMap<String, usize>,
    slots: Vec<f64>,
    /// Variable index and right-hand side of each dynamics entry.
    dynamics: Vec<(usize, Program)>,
    /// Variable index, label and residual of each static, in solving order.
    statics: Vec<(usize, String, Program)>,
    guards: Vec<GuardEquation>,
    stack: Vec<f64>,
    time: f64,
}

fn additive_terms(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, a, b) => {
            additive_terms(a, out);
            additive_terms(b, out);
        }
        Expr::Neg(a) => additive_terms(a, out),
        other => out.push(other.clone()),
    }
}

impl Simulator {
    pub fn new(m: &ModelSpec, bindings: &Bindings) -> Result<Self, SimError> {
        let variables: Vec<String> = m.variables.iter().map(|v| v.name.clone()).collect();
        let mut slot_of = HashMap::new();
        let mut slots = Vec::new();
        for v in &m.variables {
            slot_of.insert(v.name.clone(), slots.len());
            slots.push(v.initial.unwrap_or(DEFAULT_INITIAL));
        }
        let params = m
            .inputs
            .iter()
            .map(|i| i.name.as_str())
            .chain(m.exogenous.iter().map(|e| e.name.as_str()))
            .chain(m.constants.iter().map(|c| c.name.as_str()));
        for name in params {
            slot_of.insert(name.to_string(), slots.len());
            slots.push(m.nominal_value(name).unwrap_or(0.0));
        }
        for (name, &value) in bindings {
            match m.symbol_kind(name) {
                Some(crate::modelspec::SymbolKind::Variable) | None => {
                    return Err(SimError::UnknownParameter(name.clone()))
                }
                Some(_) => slots[slot_of[name]] = value,
            }
        }
        let lookup = |s: &str| slot_of.get(s).copied();
        let dynamics = m
            .dynamics
            .iter()
            .map(|d| Ok((slot_of[&d.var], d.rhs.compile(&lookup)?)))
            .collect::<Result<Vec<_>, EvalError>>()?;
        let statics = Self::static_order(m)?
            .into_iter()
            .map(|(v, k)| {
                let s = &m.statics[k];
                Ok((v, s.label.clone(), s.residual.compile(&lookup)?))
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        let mut guards = Vec::new();
        let eq_only = m
            .overrides
            .iter()
            .map(|o| (m.equilibrium_label(&o.var), &o.residual))
            .chain(m.invariants.iter().map(|i| (i.label.clone(), &i.residual)));
        for (label, residual) in eq_only {
            let mut parts = Vec::new();
            additive_terms(residual, &mut parts);
            guards.push(GuardEquation {
                label,
                residual: residual.compile(&lookup)?,
                terms: parts.iter().map(|p| p.compile(&lookup)).collect::<Result<_, _>>()?,
            });
        }
        Ok(Simulator {
            variables,
            inputs: m.inputs.iter().map(|i| i.name.clone()).collect(),
            slot_of,
            slots,
            dynamics,
            statics,
            guards,
            stack: Vec::new(),
            time: 0.0,
        })
    }

    /// `(variable, static index)` pairs in solving order.
    fn static_order(m: &ModelSpec) -> Result<Vec<(usize, usize)>, SimError> {
        if m.statics.is_empty() {
            return Ok(Vec::new());
        }
        let bad = |e: &dyn std::fmt::Display| SimError::InconsistentStatics(e.to_string());
        let sys = dynamic_system(m);
        let b = BipartiteSystem::from_system(&sys, m).map_err(|e| bad(&e))?;
        let nat = natural_matching(&b).map_err(|e| bad(&e))?;
        let cog = causal_ordering_with(&b, &nat).map_err(|e| bad(&e))?;
        let mut order = Vec::new();
        for (k, s) in m.statics.iter().enumerate() {
            let f = b.equation_index(&s.label).expect("static is in the dynamic system");
            let c = cog.cluster_of(Vertex::Equation(f)).expect("equation has a cluster");
            let members = &cog.clusters[c].members;
            let v = nat.var_of(f).expect("perfect matching");
            if members.len() != 2 {
                return Err(SimError::InconsistentStatics(format!(
                    "static `{}` is coupled with other equations and cannot be solved on its own",
                    s.label
                )));
            }
            order.push((c, v, k));
        }
        order.sort_unstable();
        Ok(order.into_iter().map(|(_, v, k)| (v, k)).collect())
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Number of integrated (non-algebraic) variables.
    pub fn dimension(&self) -> usize {
        self.dynamics.len()
    }

    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), SimError> {
        match self.slot_of.get(name) {
            Some(&s) if s >= self.variables.len() => {
                self.slots[s] = value;
                Ok(())
            }
            _ => Err(SimError::UnknownParameter(name.to_string())),
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.slot_of.get(name).filter(|&&s| s >= self.variables.len()).map(|&s| self.slots[s])
    }

    /// Sets all endogenous variables (algebraic ones serve as Newton starting points).
    pub fn set_state(&mut self, full: &[f64]) -> Result<(), SimError> {
        if full.len() != self.variables.len() {
            return Err(SimError::BadInitialState { got: full.len(), expected: self.variables.len() });
        }
        self.slots[..full.len()].copy_from_slice(full);
        Ok(())
    }

    /// Current values of all endogenous variables.
    pub fn state(&self) -> Vec<f64> {
        self.slots[..self.variables.len()].to_vec()
    }

    fn dyn_state(&self) -> Vec<f64> {
        self.dynamics.iter().map(|(v, _)| self.slots[*v]).collect()
    }

    fn input_values(&self) -> Vec<f64> {
        self.inputs.iter().map(|i| self.slots[self.slot_of[i]]).collect()
    }

    fn solve_statics(&mut self) -> Result<(), SimError> {
        for (v, label, prog) in &self.statics {
            let mut x = self.slots[*v];
            let mut done = false;
            for _ in 0..60 {
                self.slots[*v] = x;
                let r = prog.eval(&self.slots, &mut self.stack);
                if r == 0.0 {
                    done = true;
                    break;
                }
                let h = 1e-7 * x.abs().max(1.0);
                self.slots[*v] = x + h;
                let d = (prog.eval(&self.slots, &mut self.stack) - r) / h;
                let step = r / d;
                if !step.is_finite() {
                    break;
                }
                x -= step;
                if step.abs() <= 1e-14 * x.abs().max(1.0) {
                    done = true;
                    break;
                }
            }
            self.slots[*v] = x;
            if !done || !x.is_finite() {
                return Err(SimError::StaticSolveFailed { label: label.clone(), t: self.time });
            }
        }
        Ok(())
    }

    /// Derivatives of the integrated variables at state `x`; also refreshes the
    /// algebraic variables.
    fn rhs(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), SimError> {
        for ((v, _), &xi) in self.dynamics.iter().zip(x) {
            self.slots[*v] = xi;
        }
        self.solve_statics()?;
        for (k, (_, prog)) in self.dynamics.iter().enumerate() {
            out[k] = prog.eval(&self.slots, &mut self.stack);
        }
        Ok(())
    }

    /// One RK4 step of size `dt`; returns `max |dX/dt|` at the start of the step.
    fn step(&mut self, dt: f64, w: &mut Work) -> Result<f64, SimError> {
        let n = self.dimension();
        w.x.clear();
        w.x.extend(self.dyn_state());
        self.rhs(&w.x, &mut w.k1)?;
        let norm = w.k1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            w.tmp[i] = w.x[i] + 0.5 * dt * w.k1[i];
        }
        self.rhs(&w.tmp, &mut w.k2)?;
        for i in 0..n {
            w.tmp[i] = w.x[i] + 0.5 * dt * w.k2[i];
        }
        self.rhs(&w.tmp, &mut w.k3)?;
        for i in 0..n {
            w.tmp[i] = w.x[i] + dt * w.k3[i];
        }
        self.rhs(&w.tmp, &mut w.k4)?;
        for i in 0..n {
            w.tmp[i] = w.x[i] + dt / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
        }
        self.time += dt;
        if w.tmp.iter().any(|v| !v.is_finite()) || !norm.is_finite() {
            return Err(SimError::NonFiniteState { t: self.time });
        }
        let next = w.tmp.clone();
        for ((v, _), &xi) in self.dynamics.iter().zip(&next) {
            self.slots[*v] = xi;
        }
        self.solve_statics()?;
        Ok(norm)
    }

    /// Current `max |dX/dt|` (statics refreshed first).
    pub fn derivative_norm(&mut self) -> Result<f64, SimError> {
        let x = self.dyn_state();
        let mut out = vec![0.0; x.len()];
        self.rhs(&x, &mut out)?;
        Ok(out.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    }

    /// Relative residuals `|r| / sum |terms|` of the equilibrium-only equations.
    fn guard_residuals(&mut self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for g in &self.guards {
            let r = g.residual.eval(&self.slots, &mut self.stack);
            let scale: f64 = g.terms.iter().map(|t| t.eval(&self.slots, &mut self.stack).abs()).sum();
            out.push((g.label.clone(), if scale > 0.0 { r.abs() / scale } else { r.abs() }));
        }
        out
    }

    /// Integrates until the derivative stays below `cfg.eq_tol` for
    /// [`SETTLE_STEPS`] steps. `observe` sees every state after a step.
    pub(crate) fn settle(
        &mut self,
        cfg: &SimConfig,
        mut observe: impl FnMut(f64, &Simulator),
    ) -> Result<Equilibrium, SimError> {
        cfg.validate()?;
        self.solve_statics()?;
        let start = self.time;
        let mut work = Work::new(self.dimension());
        let mut calm = 0usize;
        let mut last = f64::INFINITY;
        while self.time - start < cfg.t_max {
            last = self.step(cfg.dt, &mut work)?;
            observe(self.time, self);
            if last < cfg.eq_tol {
                calm += 1;
                if calm >= SETTLE_STEPS {
                    return Ok(self.finish_equilibrium(cfg));
                }
            } else {
                calm = 0;
            }
        }
        Err(SimError::NoConvergence { t: self.time, residual: last })
    }

    fn finish_equilibrium(&mut self, cfg: &SimConfig) -> Equilibrium {
        let derivative_norm = self.derivative_norm().unwrap_or(f64::NAN);
        let mut warnings = Vec::new();
        if !(derivative_norm <= 100.0 * cfg.eq_tol) {
            warnings.push(format!("derivative norm {derivative_norm:e} exceeds 100 * eq_tol"));
        }
        for (label, rel) in self.guard_residuals() {
            if rel > 0.1 {
                let msg = format!(
                    "equilibrium equation `{label}` has relative residual {rel:.3}; its approximation does not hold here"
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
        Equilibrium { state: self.state(), time: self.time, derivative_norm, warnings }
    }
}

struct Work {
    x: Vec<f64>,
    tmp: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Work {
            x: Vec::with_capacity(n),
            tmp: vec![0.0; n],
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
        }
    }
}

/// Model initial values, defaulting to [`DEFAULT_INITIAL`].
pub fn default_initial_state(m: &ModelSpec) -> Vec<f64> {
    m.variables.iter().map(|v| v.initial.unwrap_or(DEFAULT_INITIAL)).collect()
}

/// Integrates from `x0` (all endogenous variables) over `[0, cfg.t_max]`.
pub fn integrate(
    m: &ModelSpec,
    bindings: &Bindings,
    x0: &[f64],
    schedule: &InputSchedule,
    cfg: &SimConfig,
) -> Result<Trace, SimError> {
    cfg.validate()?;
    let mut sim = Simulator::new(m, bindings)?;
    for (_, name, _) in &schedule.changes {
        if !m.inputs.iter().any(|i| &i.name == name) {
            return Err(SimError::UnknownInput(name.clone()));
        }
    }
    let mut changes = schedule.changes.clone();
    changes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut next_change = 0;
    let mut apply = |sim: &mut Simulator, t: f64| {
        while next_change < changes.len() && changes[next_change].0 <= t + 1e-12 {
            let (_, name, value) = &changes[next_change];
            sim.set_parameter(name, *value).expect("input checked above");
            next_change += 1;
        }
    };
    sim.set_state(x0)?;
    apply(&mut sim, 0.0);
    sim.solve_statics()?;
    let mut trace = Trace::new(sim.variables.clone(), sim.inputs.clone());
    let record = |trace: &mut Trace, sim: &Simulator| {
        trace.times.push(sim.time);
        trace.states.push(sim.state());
        trace.input_values.push(sim.input_values());
    };
    record(&mut trace, &sim);
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    let stride = cfg.record_stride();
    let mut work = Work::new(sim.dimension());
    for k in 1..=steps {
        let t = sim.time;
        apply(&mut sim, t);
        sim.step(cfg.dt, &mut work)?;
        sim.time = k as f64 * cfg.dt;
        if k % stride == 0 || k == steps {
            record(&mut trace, &sim);
        }
    }
    Ok(trace)
}

/// Integrates from `x0` until the derivative has stayed below `cfg.eq_tol` for
/// [`SETTLE_STEPS`] consecutive steps.
pub fn find_equilibrium(m: &ModelSpec, bindings: &Bindings, x0: &[f64], cfg: &SimConfig) -> Result<Equilibrium, SimError> {
    let mut sim = Simulator::new(m, bindings)?;
    sim.set_state(x0)?;
    sim.settle(cfg, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspec::parse_model;
    use approx::assert_abs_diff_eq;

    fn decay() -> ModelSpec {
        parse_model("model decay\nvar x = 1\ndyn x: -x\n").unwrap()
    }

    #[test]
    fn zero_field_is_constant() {
        let m = parse_model("model z\nvar x = 3\ndyn x: 0\n").unwrap();
        let cfg = SimConfig { t_max: 1.0, dt: 0.01, ..SimConfig::default() };
        let tr = integrate(&m, &Bindings::new(), &[3.0], &InputSchedule::default(), &cfg).unwrap();
        assert!(tr.states.iter().all(|s| s[0] == 3.0));
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let cfg = SimConfig { t_max: 1.0, ..SimConfig::default() };
        let tr = integrate(&decay(), &Bindings::new(), &[1.0], &InputSchedule::default(), &cfg).unwrap();
        assert_abs_diff_eq!(*tr.times.last().unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tr.states.last().unwrap()[0], (-1.0f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn decay_settles_at_zero() {
        let cfg = SimConfig { dt: 0.01, ..SimConfig::default() };
        let eq = find_equilibrium(&decay(), &Bindings::new(), &[1.0], &cfg).unwrap();
        assert!(eq.state[0].abs() < cfg.eq_tol);
    }

    #[test]
    fn blow_up_is_reported() {
        let m = parse_model("model b\nvar x = 1\ndyn x: x^2\n").unwrap();
        let cfg = SimConfig { dt: 0.01, t_max: 10.0, ..SimConfig::default() };
        let err = integrate(&m, &Bindings::new(), &[1.0], &InputSchedule::default(), &cfg).unwrap_err();
        assert!(matches!(err, SimError::NonFiniteState { .. }));
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = parse_model("model osc\nvar x = 1, y = 0\ndyn x: y\ndyn y: -x\n").unwrap();
        let cfg = SimConfig { dt: 0.01, t_max: 5.0, ..SimConfig::default() };
        let err = find_equilibrium(&m, &Bindings::new(), &[1.0, 0.0], &cfg).unwrap_err();
        assert!(matches!(err, SimError::NoConvergence { .. }));
    }

    #[test]
    fn coupled_statics_are_rejected() {
        let m = parse_model("model c\nvar x y\nstatic a: x + y - 1 = 0\nstatic b: x - y = 0\n").unwrap();
        assert!(matches!(Simulator::new(&m, &Bindings::new()), Err(SimError::InconsistentStatics(_))));
    }

    #[test]
    fn unknown_binding_is_rejected() {
        let mut b = Bindings::new();
        b.insert("nope".into(), 1.0);
        assert!(matches!(Simulator::new(&decay(), &b), Err(SimError::UnknownParameter(_))));
    }

    #[test]
    fn statics_solve_nonlinear_equation() {
        let m = parse_model("model s\nconst c = 2\nvar y = 1, x = 1\nstatic f: y^3 + y - x * c = 0\ndyn x: 1 - x\n").unwrap();
        let cfg = SimConfig { dt: 0.01, ..SimConfig::default() };
        let eq = find_equilibrium(&m, &Bindings::new(), &[1.0, 1.0], &cfg).unwrap();
        let y = eq.state[0];
        assert_abs_diff_eq!(y * y * y + y, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn schedule_switches_input() {
        let m = parse_model("model u\ninput u = 0\nvar x = 0\ndyn x: u\n").unwrap();
        let sched = InputSchedule { changes: vec![(0.5, "u".into(), 1.0)] };
        let cfg = SimConfig { dt: 0.01, t_max: 1.0, record_interval: 0.0, ..SimConfig::default() };
        let tr = integrate(&m, &Bindings::new(), &[0.0], &sched, &cfg).unwrap();
        assert_abs_diff_eq!(tr.states.last().unwrap()[0], 0.5, epsilon = 1e-9);
        assert_eq!(tr.input_values.last().unwrap()[0], 1.0);
        assert_eq!(tr.times.len(), 101);
    }
}
