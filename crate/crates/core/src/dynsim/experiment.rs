//! Equilibrate, switch one input or parameter, and equilibrate again.

use super::{Bindings, Equilibrium, SimConfig, SimError, Simulator, Trace};
use crate::modelspec::{ModelSpec, SymbolKind};

#[derive(Debug, Clone, PartialEq)]
pub struct VariableResponse {
    pub name: String,
    pub pre: f64,
    pub post: f64,
    /// `max |X(t) - pre|` after the switch.
    pub transient_peak: f64,
    /// `|post - pre|`.
    pub final_deviation: f64,
    /// `post - pre`.
    pub final_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchReport {
    pub parameter: String,
    pub pre_value: f64,
    pub post_value: f64,
    pub pre_equilibrium: Equilibrium,
    pub post_equilibrium: Equilibrium,
    /// Trajectory after the switch, with time measured from the switch.
    pub trace: Trace,
    pub responses: Vec<VariableResponse>,
}

impl SwitchReport {
    pub fn response(&self, name: &str) -> Option<&VariableResponse> {
        self.responses.iter().find(|r| r.name == name)
    }
}

fn switch_experiment(
    m: &ModelSpec,
    bindings: &Bindings,
    x0: &[f64],
    param: &str,
    pre_value: f64,
    post_value: f64,
    cfg: &SimConfig,
) -> Result<SwitchReport, SimError> {
    let mut sim = Simulator::new(m, bindings)?;
    sim.set_state(x0)?;
    sim.set_parameter(param, pre_value)?;
    let pre_equilibrium = sim.settle(cfg, |_, _| {})?;
    let pre = pre_equilibrium.state.clone();
    sim.set_parameter(param, post_value)?;
    sim.time = 0.0;
    let mut peak = vec![0.0f64; pre.len()];
    let mut trace = Trace::new(sim.variables.clone(), sim.inputs.clone());
    trace.times.push(0.0);
    trace.states.push(pre.clone());
    trace.input_values.push(sim.input_values());
    let stride = cfg.record_stride();
    let mut k = 0usize;
    let post_equilibrium = sim.settle(cfg, |t, s| {
        let x = &s.slots[..pre.len()];
        for (p, (a, b)) in peak.iter_mut().zip(x.iter().zip(&pre)) {
            *p = p.max((a - b).abs());
        }
        k += 1;
        if k % stride == 0 {
            trace.times.push(t);
            trace.states.push(x.to_vec());
            trace.input_values.push(s.input_values());
        }
    })?;
    let responses = sim
        .variables
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let post = post_equilibrium.state[i];
            VariableResponse {
                name: name.clone(),
                pre: pre[i],
                post,
                transient_peak: peak[i],
                final_deviation: (post - pre[i]).abs(),
                final_change: post - pre[i],
            }
        })
        .collect();
    Ok(SwitchReport {
        parameter: param.to_string(),
        pre_value,
        post_value,
        pre_equilibrium,
        post_equilibrium,
        trace,
        responses,
    })
}

/// Step change of input `input` from `pre_value` to `post_value`.
pub fn step_response(
    m: &ModelSpec,
    bindings: &Bindings,
    x0: &[f64],
    input: &str,
    pre_value: f64,
    post_value: f64,
    cfg: &SimConfig,
) -> Result<SwitchReport, SimError> {
    if m.symbol_kind(input) != Some(SymbolKind::Input) {
        return Err(SimError::UnknownInput(input.to_string()));
    }
    switch_experiment(m, bindings, x0, input, pre_value, post_value, cfg)
}

/// Soft intervention changing constant or exogenous parameter `param`.
pub fn soft_intervention_experiment(
    m: &ModelSpec,
    bindings: &Bindings,
    x0: &[f64],
    param: &str,
    pre_value: f64,
    post_value: f64,
    cfg: &SimConfig,
) -> Result<SwitchReport, SimError> {
    match m.symbol_kind(param) {
        Some(SymbolKind::Constant | SymbolKind::Exogenous) => {
            switch_experiment(m, bindings, x0, param, pre_value, post_value, cfg)
        }
        _ => Err(SimError::UnknownParameter(param.to_string())),
    }
}
