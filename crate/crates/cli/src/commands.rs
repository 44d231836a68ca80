//! Subcommand implementations. Each returns its text output; `run` routes it to
//! stdout or `--out`.

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::Path;

use adaptscan_core::adaptation::{
    adapting_variables, detect_adaptation_graphside, natural_matching, AdaptationError, Conclusion, DetectionVerdict,
};
use adaptscan_core::corpus;
use adaptscan_core::dataset::{Dataset, DatasetError};
use adaptscan_core::dynsim::{
    default_initial_state, integrate, sample_equilibria, soft_intervention_experiment, step_response, Bindings,
    InputSchedule, SimConfig, SimError, SwitchReport,
};
use adaptscan_core::graphcore::{
    causal_ordering, causal_ordering_with, cog_to_csv, cog_to_dot, markov_ordering, mog_to_csv, mog_to_dot,
    BipartiteSystem, CausalOrderingGraph, GraphError,
};
use adaptscan_core::indep::{detect_adaptation_from_data, independence_table, lcd, IndepError};
use adaptscan_core::modelspec::{dynamic_system, equilibrium_system, parse_model, Distribution, ModelSpec};
use adaptscan_core::separation::{d_separated, SeparationQuery};

use crate::{Cli, Command, Format, Mode, SimArgs};

/// A failed invocation: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

const USAGE: u8 = 1;
const MODEL: u8 = 2;
const NO_CONVERGENCE: u8 = 3;

type Result<T> = std::result::Result<T, Failure>;

fn fail(code: u8, message: impl Display) -> Failure {
    Failure { code, message: message.to_string() }
}

fn graph_err(source: &str) -> impl Fn(GraphError) -> Failure + '_ {
    move |e| fail(MODEL, format!("{source}: {e}"))
}

fn adapt_err(source: &str) -> impl Fn(AdaptationError) -> Failure + '_ {
    move |e| fail(MODEL, format!("{source}: {e}"))
}

fn indep_err(source: &str) -> impl Fn(IndepError) -> Failure + '_ {
    move |e| fail(MODEL, format!("{source}: {e}"))
}

fn sim_err(source: &str) -> impl Fn(SimError) -> Failure + '_ {
    move |e| {
        let code = match &e {
            SimError::NoConvergence { .. } => NO_CONVERGENCE,
            SimError::SampleFailures { first, .. } if matches!(**first, SimError::NoConvergence { .. }) => {
                NO_CONVERGENCE
            }
            _ => MODEL,
        };
        fail(code, format!("{source}: {e}"))
    }
}

/// Loads a model file, falling back to a bundled model of that name.
fn load_model(path: &str) -> Result<ModelSpec> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match corpus::source(path) {
            Some(s) => s.to_string(),
            None => return Err(fail(MODEL, format!("{path}: {e}"))),
        },
    };
    parse_model(&text).map_err(|e| fail(MODEL, format!("{path}: {e}")))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| fail(MODEL, format!("{}: {e}", path.display())))?;
    Dataset::read_csv(file).map_err(|e: DatasetError| fail(MODEL, format!("{}: {e}", path.display())))
}

fn ordering(m: &ModelSpec, mode: Mode, source: &str) -> Result<CausalOrderingGraph> {
    match mode {
        Mode::Equilibrium => {
            let b = BipartiteSystem::from_system(&equilibrium_system(m), m).map_err(graph_err(source))?;
            causal_ordering(&b).map_err(graph_err(source))
        }
        Mode::Dynamic => {
            let b = BipartiteSystem::from_system(&dynamic_system(m), m).map_err(graph_err(source))?;
            let nat = natural_matching(&b).map_err(adapt_err(source))?;
            causal_ordering_with(&b, &nat).map_err(graph_err(source))
        }
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Dynamic => "dynamic",
        Mode::Equilibrium => "equilibrium",
    }
}

fn split_assignment(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| fail(USAGE, format!("expected NAME=VALUE, got `{s}`")))
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| fail(USAGE, format!("`{s}` is not a number")))
}

fn parse_distribution(s: &str) -> Result<Distribution> {
    let call = |name: &str| s.strip_prefix(name).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')'));
    if let Some(args) = call("uniform") {
        let (lo, hi) = args.split_once(',').ok_or_else(|| fail(USAGE, format!("`{s}`: uniform takes two bounds")))?;
        let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
        if !(lo <= hi) {
            return Err(fail(USAGE, format!("`{s}`: lower bound above upper bound")));
        }
        Ok(Distribution::Uniform(lo, hi))
    } else if let Some(c) = call("constant") {
        Ok(Distribution::Constant(parse_number(c)?))
    } else {
        Ok(Distribution::Constant(parse_number(s)?))
    }
}

fn sim_setup(args: &SimArgs, default_t_max: Option<f64>) -> Result<(SimConfig, Bindings)> {
    let mut cfg = SimConfig::default();
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t) = args.t_max.or(default_t_max) {
        cfg.t_max = t;
    }
    if let Some(tol) = args.tol {
        cfg.eq_tol = tol;
    }
    let mut bindings = Bindings::new();
    for s in &args.set {
        let (name, value) = split_assignment(s)?;
        bindings.insert(name.to_string(), parse_number(value)?);
    }
    Ok((cfg, bindings))
}

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e6)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn switch_table(r: &SwitchReport) -> String {
    let mut s = String::from("variable,pre,post,transient_peak,final_deviation,final_change\n");
    for v in &r.responses {
        let cells = [v.pre, v.post, v.transient_peak, v.final_deviation, v.final_change].map(num);
        writeln!(s, "{},{}", v.name, cells.join(",")).unwrap();
    }
    for w in r.pre_equilibrium.warnings.iter().chain(&r.post_equilibrium.warnings) {
        eprintln!("warning: {w}");
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| fail(MODEL, format!("{}: {e}", path.display())))
}

fn verdict_table(v: &DetectionVerdict) -> String {
    let conclusion = match v.conclusion {
        Conclusion::AdaptationDetected => "adaptation_detected",
        Conclusion::Inconclusive => "inconclusive",
    };
    format!(
        "target_equation,target_variable,condition1,condition2,witnesses,conclusion\n{},{},{},{},{},{}\n",
        v.target_equation,
        v.target_variable,
        v.condition1,
        v.condition2,
        v.witnesses.join(" "),
        conclusion
    )
}

/// Equation index for `target`, given as an equation label or as its naturally
/// labelled variable (with or without `v_`).
fn target_equation(cog: &CausalOrderingGraph, target: &str) -> Option<usize> {
    if let Some(f) = cog.equations.iter().position(|e| e == target) {
        return Some(f);
    }
    let plain = target.strip_prefix("v_").unwrap_or(target);
    let vi = cog.variables.iter().position(|v| v == plain)?;
    cog.natural.iter().position(|&n| n == Some(vi))
}

fn str_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Order { model, mode, format } => {
            let m = load_model(model)?;
            let cog = ordering(&m, *mode, model)?;
            Ok(match format {
                Format::Dot => cog_to_dot(&cog, &format!("{} {}", m.name, mode_name(*mode))),
                Format::Csv => cog_to_csv(&cog),
            })
        }
        Command::Markov { model, mode, format } => {
            let m = load_model(model)?;
            let mog = markov_ordering(&ordering(&m, *mode, model)?);
            Ok(match format {
                Format::Dot => mog_to_dot(&mog, &format!("{} {}", m.name, mode_name(*mode))),
                Format::Csv => mog_to_csv(&mog),
            })
        }
        Command::Dsep { model, mode, a, b, given } => {
            let m = load_model(model)?;
            let mog = markov_ordering(&ordering(&m, *mode, model)?);
            let q = SeparationQuery::from_names(&mog, &str_refs(a), &str_refs(b), &str_refs(given))
                .map_err(graph_err(model))?;
            Ok(if d_separated(&mog, &q) { "separated\n" } else { "connected\n" }.to_string())
        }
        Command::IndepTable { data, columns, max_cond, alpha, model } => {
            let ds = load_dataset(data)?;
            let cols: Vec<&str> = if columns.is_empty() {
                ds.names().iter().map(String::as_str).collect()
            } else {
                columns.iter().map(String::as_str).collect()
            };
            let source = data.display().to_string();
            let rows = independence_table(&ds, &cols, *max_cond, *alpha).map_err(indep_err(&source))?;
            let mog = match model {
                Some(path) => Some(markov_ordering(&ordering(&load_model(path)?, Mode::Equilibrium, path)?)),
                None => None,
            };
            let mut s = String::from("i,j,given,rho,p,independent");
            s.push_str(if mog.is_some() { ",separated\n" } else { "\n" });
            for r in &rows {
                write!(s, "{},{},{},{},{},{}", r.i, r.j, r.z.join(" "), num(r.rho), num(r.p), r.independent).unwrap();
                if let (Some(mog), Some(path)) = (&mog, model) {
                    let z: Vec<&str> = r.z.iter().map(String::as_str).collect();
                    let q = SeparationQuery::from_names(mog, &[&r.i], &[&r.j], &z).map_err(graph_err(path))?;
                    write!(s, ",{}", d_separated(mog, &q)).unwrap();
                }
                s.push('\n');
            }
            Ok(s)
        }
        Command::Adapt { model, input } => {
            let m = load_model(model)?;
            let r = adapting_variables(&m, input).map_err(adapt_err(model))?;
            let mut s = String::from("variable,transient_reachable,equilibrium_reachable,adapting\n");
            for (i, name) in r.variables.iter().enumerate() {
                let (t, e) = (r.transient_reachable.contains(&i), r.equilibrium_reachable.contains(&i));
                writeln!(s, "{name},{t},{e},{}", t && !e).unwrap();
            }
            if r.assumes_transient_response {
                eprintln!("note: adaptation assumes the system equilibrates and the dynamic paths carry a response");
            }
            Ok(s)
        }
        Command::Simulate { model, sim, schedule, every } => {
            let m = load_model(model)?;
            let (mut cfg, bindings) = sim_setup(sim, Some(100.0))?;
            cfg.record_interval = *every;
            let mut sched = InputSchedule::default();
            for entry in schedule {
                let (time, rest) = entry
                    .split_once(':')
                    .ok_or_else(|| fail(USAGE, format!("expected TIME:NAME=VALUE, got `{entry}`")))?;
                let (name, value) = split_assignment(rest)?;
                sched.changes.push((parse_number(time)?, name.to_string(), parse_number(value)?));
            }
            let trace =
                integrate(&m, &bindings, &default_initial_state(&m), &sched, &cfg).map_err(sim_err(model))?;
            Ok(trace.to_csv())
        }
        Command::Step { model, input, pre, post, sim, trace } => {
            let m = load_model(model)?;
            let (cfg, bindings) = sim_setup(sim, None)?;
            let r = step_response(&m, &bindings, &default_initial_state(&m), input, *pre, *post, &cfg)
                .map_err(sim_err(model))?;
            if let Some(path) = trace {
                write_file(path, &r.trace.to_csv())?;
            }
            Ok(switch_table(&r))
        }
        Command::Intervene { model, param, pre, post, sim, trace } => {
            let m = load_model(model)?;
            let (cfg, bindings) = sim_setup(sim, None)?;
            let r = soft_intervention_experiment(&m, &bindings, &default_initial_state(&m), param, *pre, *post, &cfg)
                .map_err(sim_err(model))?;
            if let Some(path) = trace {
                write_file(path, &r.trace.to_csv())?;
            }
            Ok(switch_table(&r))
        }
        Command::Sample { model, n, seed, vary, sim } => {
            let mut m = load_model(model)?;
            let (cfg, bindings) = sim_setup(sim, None)?;
            // Fixed values become constant distributions so they apply to every sample.
            let mut overrides = Vec::new();
            for (name, value) in &bindings {
                overrides.push((name.clone(), Distribution::Constant(*value)));
            }
            for v in vary {
                let (name, dist) = split_assignment(v)?;
                overrides.push((name.to_string(), parse_distribution(dist)?));
            }
            overrides.sort_by(|a, b| a.0.cmp(&b.0));
            for (name, dist) in &overrides {
                m = m
                    .with_exogenous(name, *dist)
                    .ok_or_else(|| fail(MODEL, format!("{model}: `{name}` is not a parameter")))?;
            }
            let ds = sample_equilibria(&m, *n, *seed, &cfg, &[]).map_err(sim_err(model))?;
            Ok(ds.to_csv_string())
        }
        Command::Lcd { data, context, candidates, alpha } => {
            let ds = load_dataset(data)?;
            let cands: Vec<&str> = if candidates.is_empty() {
                ds.names().iter().map(String::as_str).filter(|n| n != context).collect()
            } else {
                candidates.iter().map(String::as_str).collect()
            };
            let source = data.display().to_string();
            let out = lcd(&ds, context, &cands, *alpha).map_err(indep_err(&source))?;
            for (x, y, e) in &out.skipped {
                eprintln!("warning: pair ({x}, {y}) skipped: {e}");
            }
            let mut s = String::from("context,x,y,rho_context_x,p_context_x,rho_x_y,p_x_y,rho_context_y_given_x,p_context_y_given_x\n");
            for t in &out.triples {
                let cells = [&t.context_x, &t.x_y, &t.context_y_given_x].map(|r| format!("{},{}", num(r.rho), num(r.p)));
                writeln!(s, "{},{},{},{}", t.context, t.x, t.y, cells.join(",")).unwrap();
            }
            Ok(s)
        }
        Command::Detect { model, target, baseline, intervened, alpha } => {
            let m = load_model(model)?;
            let cog = ordering(&m, Mode::Equilibrium, model)?;
            let mog = markov_ordering(&cog);
            let f = target_equation(&cog, target)
                .ok_or_else(|| fail(MODEL, format!("{model}: unknown equation `{target}`")))?;
            let label = cog.equations[f].clone();
            let verdict = match (baseline, intervened) {
                (Some(b), Some(i)) => {
                    let var = cog.natural[f]
                        .map(|v| cog.variables[v].clone())
                        .ok_or_else(|| fail(MODEL, format!("{model}: `{label}` has no naturally labelled variable")))?;
                    let (b, i) = (load_dataset(b)?, load_dataset(i)?);
                    let mut v = detect_adaptation_from_data(&b, &i, &var, &mog, *alpha).map_err(indep_err(model))?;
                    v.target_equation = label;
                    v
                }
                _ => detect_adaptation_graphside(&cog, &mog, &label).map_err(adapt_err(model))?,
            };
            Ok(verdict_table(&verdict))
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let text = execute(&cli.command)?;
    match &cli.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distributions() {
        assert_eq!(parse_distribution("uniform(0.98, 1.1)").unwrap(), Distribution::Uniform(0.98, 1.1));
        assert_eq!(parse_distribution("constant(0.7)").unwrap(), Distribution::Constant(0.7));
        assert_eq!(parse_distribution("2").unwrap(), Distribution::Constant(2.0));
        assert_eq!(parse_distribution("uniform(2, 1)").unwrap_err().code, USAGE);
        assert_eq!(parse_distribution("normal(0, 1)").unwrap_err().code, USAGE);
    }

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(2.3e-10), "2.3e-10");
        assert_eq!(num(1.5e7), "1.5e7");
    }

    #[test]
    fn assignments() {
        assert_eq!(split_assignment("k_me = 1.0").unwrap(), ("k_me", "1.0"));
        assert_eq!(split_assignment("k_me").unwrap_err().code, USAGE);
        assert_eq!(split_assignment("=1").unwrap_err().code, USAGE);
    }

    #[test]
    fn targets_by_equation_or_variable() {
        let m = corpus::model("viral").unwrap();
        let cog = ordering(&m, Mode::Equilibrium, "viral").unwrap();
        let f = target_equation(&cog, "f_E").unwrap();
        assert_eq!(target_equation(&cog, "v_E"), Some(f));
        assert_eq!(target_equation(&cog, "E"), Some(f));
        assert_eq!(target_equation(&cog, "f_Q"), None);
    }

    #[test]
    fn no_convergence_maps_to_three() {
        let e = SimError::NoConvergence { t: 1.0, residual: 1.0 };
        assert_eq!(sim_err("m")(e.clone()).code, NO_CONVERGENCE);
        let wrapped = SimError::SampleFailures { failed: vec![0], first: Box::new(e) };
        assert_eq!(sim_err("m")(wrapped).code, NO_CONVERGENCE);
        assert_eq!(sim_err("m")(SimError::NonFiniteState { t: 0.0 }).code, MODEL);
    }

}
