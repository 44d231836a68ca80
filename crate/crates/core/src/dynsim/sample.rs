//! Equilibrium datasets over random exogenous draws.
//!
//! Sample `i` draws its exogenous values from xoshiro256++ seeded with
//! `mix(seed) ^ i` through splitmix64 (`Xoshiro256PlusPlus::seed_from_u64`), where
//! `mix` is the splitmix64 finalizer. Mixing the seed first keeps nearby seeds from
//! reusing each other's substreams in permuted order. Exogenous symbols are drawn
//! in declaration order; a uniform draw is `lo + (hi - lo) * u` with `u` the
//! generator's next `f64` in `[0, 1)`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use super::{default_initial_state, find_equilibrium, Bindings, SimConfig, SimError, Simulator};
use crate::dataset::Dataset;
use crate::modelspec::{Distribution, ModelSpec};

/// Starting state of every sample's equilibrium search.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// The model's initial values.
    Model,
    /// Explicit values for all endogenous variables.
    Values(Vec<f64>),
    /// The equilibrium at nominal parameter values, reached from the model's
    /// initial values.
    NominalEquilibrium,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    pub sim: SimConfig,
    /// Parameters made random for this experiment, with their distributions.
    pub overrides: Vec<(String, Distribution)>,
    pub initial: InitialState,
}

/// splitmix64 output function.
pub fn mix_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn draw(dist: &Distribution, rng: &mut Xoshiro256PlusPlus) -> f64 {
    match *dist {
        Distribution::Constant(c) => c,
        Distribution::Uniform(lo, hi) => lo + (hi - lo) * rng.random::<f64>(),
    }
}

/// Samples `n` equilibria with the default starting state (the nominal equilibrium).
pub fn sample_equilibria(
    m: &ModelSpec,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
    overrides: &[(String, Distribution)],
) -> Result<Dataset, SimError> {
    sample_equilibria_with(
        m,
        &SampleConfig {
            n,
            seed,
            sim: cfg.clone(),
            overrides: overrides.to_vec(),
            initial: InitialState::NominalEquilibrium,
        },
    )
}

/// Columns: endogenous variables, then every exogenous symbol of the model with the
/// overrides applied (overridden non-exogenous parameters come last).
pub fn sample_equilibria_with(m: &ModelSpec, sc: &SampleConfig) -> Result<Dataset, SimError> {
    if sc.n == 0 {
        return Err(SimError::InvalidConfig("n must be at least 1".into()));
    }
    let mut model = m.clone();
    for (name, dist) in &sc.overrides {
        model = model
            .with_exogenous(name, *dist)
            .ok_or_else(|| SimError::UnknownParameter(name.clone()))?;
    }
    let x0 = match &sc.initial {
        InitialState::Model => default_initial_state(&model),
        InitialState::Values(v) => v.clone(),
        InitialState::NominalEquilibrium => {
            find_equilibrium(&model, &Bindings::new(), &default_initial_state(&model), &sc.sim)?.state
        }
    };
    let template = Simulator::new(&model, &Bindings::new())?;
    if x0.len() != model.variables.len() {
        return Err(SimError::BadInitialState { got: x0.len(), expected: model.variables.len() });
    }
    let exog: Vec<(String, Distribution)> = model.exogenous.iter().map(|e| (e.name.clone(), e.dist)).collect();
    let base = mix_seed(sc.seed);
    let rows: Vec<Result<Vec<f64>, SimError>> = (0..sc.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(base ^ i as u64);
            let mut sim = template.clone();
            let mut draws = Vec::with_capacity(exog.len());
            for (name, dist) in &exog {
                let v = draw(dist, &mut rng);
                sim.set_parameter(name, v)?;
                draws.push(v);
            }
            sim.set_state(&x0)?;
            let eq = sim.settle(&sc.sim, |_, _| {})?;
            let mut row = eq.state;
            row.extend(draws);
            Ok(row)
        })
        .collect();
    let mut failed = Vec::new();
    let mut first = None;
    for (i, r) in rows.iter().enumerate() {
        if let Err(e) = r {
            failed.push(i);
            first.get_or_insert_with(|| e.clone());
        }
    }
    if let Some(first) = first {
        return Err(SimError::SampleFailures { failed, first: Box::new(first) });
    }
    let names: Vec<String> = model
        .variables
        .iter()
        .map(|v| v.name.clone())
        .chain(exog.iter().map(|(n, _)| n.clone()))
        .collect();
    let mut columns = vec![Vec::with_capacity(sc.n); names.len()];
    for row in rows.into_iter().map(|r| r.expect("failures handled above")) {
        for (c, v) in columns.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Ok(Dataset::new(names, columns, Some(sc.seed)).expect("columns have equal length"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspec::parse_model;

    #[test]
    fn single_constant_sample_equals_equilibrium() {
        let m = parse_model("model c\nexog w ~ constant(2)\nvar x = 0\ndyn x: w - x\n").unwrap();
        let cfg = SimConfig { dt: 0.01, ..SimConfig::default() };
        let ds = sample_equilibria(&m, 1, 7, &cfg, &[]).unwrap();
        let eq = find_equilibrium(&m, &Bindings::new(), &[0.0], &cfg).unwrap();
        assert_eq!(ds.names(), &["x".to_string(), "w".to_string()]);
        assert!((ds.column("x").unwrap()[0] - eq.state[0]).abs() < 1e-8);
        assert_eq!(ds.column("w").unwrap(), &[2.0]);
    }

    #[test]
    fn overrides_add_columns_and_are_seeded() {
        let m = parse_model("model c\nconst k = 1\nvar x = 0\ndyn x: k - x\n").unwrap();
        let cfg = SimConfig { dt: 0.05, ..SimConfig::default() };
        let ov = [("k".to_string(), Distribution::Uniform(1.0, 2.0))];
        let a = sample_equilibria(&m, 8, 3, &cfg, &ov).unwrap();
        let b = sample_equilibria(&m, 8, 3, &cfg, &ov).unwrap();
        assert_eq!(a, b);
        let k = a.column("k").unwrap();
        assert!(k.iter().all(|&v| (1.0..2.0).contains(&v)));
        for (x, k) in a.column("x").unwrap().iter().zip(k) {
            assert!((x - k).abs() < 1e-8);
        }
        let c = sample_equilibria(&m, 8, 2, &cfg, &ov).unwrap();
        let mut ka = k.to_vec();
        let mut kc = c.column("k").unwrap().to_vec();
        ka.sort_by(f64::total_cmp);
        kc.sort_by(f64::total_cmp);
        assert!(ka.iter().zip(&kc).all(|(a, b)| a != b), "nearby seeds share draws");
        assert!(sample_equilibria(&m, 8, 3, &cfg, &[("zz".into(), Distribution::Constant(1.0))]).is_err());
    }
}
