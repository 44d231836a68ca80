//! Shared fixtures and independent oracles for the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use adaptscan_core::adaptation::natural_matching;
use adaptscan_core::corpus;
use adaptscan_core::dataset::Dataset;
use adaptscan_core::dynsim::{sample_equilibria, SimConfig};
use adaptscan_core::graphcore::{
    causal_ordering, causal_ordering_with, markov_ordering, BipartiteSystem, CausalOrderingGraph, GraphError,
    MarkovOrderingGraph,
};
use adaptscan_core::modelspec::{dynamic_system, equilibrium_system, Distribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Dynamic,
    Equilibrium,
}

/// Expected causal ordering graph: clusters as space-separated member names
/// (variables first), edges as (source, target cluster).
pub struct Golden {
    pub model: &'static str,
    pub mode: Mode,
    pub clusters: &'static [&'static str],
    pub edges: &'static [(&'static str, &'static str)],
}

pub const GOLDENS: &[Golden] = &[
    Golden {
        model: "example1",
        mode: Mode::Equilibrium,
        clusters: &["v_X1 f1", "v_X2 f2", "w1", "w2"],
        edges: &[("v_X1", "v_X2 f2"), ("w1", "v_X1 f1"), ("w2", "v_X2 f2")],
    },
    Golden {
        model: "example1",
        mode: Mode::Dynamic,
        clusters: &["v_X1 f1", "v_X2 f2", "w1", "w2"],
        edges: &[("v_X1", "v_X2 f2"), ("w1", "v_X1 f1"), ("w2", "v_X2 f2")],
    },
    Golden {
        model: "bathtub",
        mode: Mode::Equilibrium,
        clusters: &["v_I f_I", "v_O f_D", "v_P f_O", "v_D f_P", "U_I", "U_1", "U_2", "U_3", "U_4", "U_5", "I_K"],
        edges: &[("v_I", "v_O f_D"), ("v_P", "v_D f_P"), ("v_O", "v_P f_O"), ("U_I", "v_I f_I"), ("U_1", "v_O f_D"), ("U_2", "v_D f_P"), ("U_3", "v_D f_P"), ("U_4", "v_P f_O"), ("U_5", "v_P f_O"), ("I_K", "v_P f_O")],
    },
    Golden {
        model: "bathtub",
        mode: Mode::Dynamic,
        clusters: &["v_I f_I", "v_D v_P v_O g_D g_P g_O", "U_I", "U_1", "U_2", "U_3", "U_4", "U_5", "I_K"],
        edges: &[("v_I", "v_D v_P v_O g_D g_P g_O"), ("U_I", "v_I f_I"), ("U_1", "v_D v_P v_O g_D g_P g_O"), ("U_2", "v_D v_P v_O g_D g_P g_O"), ("U_3", "v_D v_P v_O g_D g_P g_O"), ("U_4", "v_D v_P v_O g_D g_P g_O"), ("U_5", "v_D v_P v_O g_D g_P g_O"), ("I_K", "v_D v_P v_O g_D g_P g_O")],
    },
    Golden {
        model: "viral",
        mode: Mode::Equilibrium,
        clusters: &["v_I f_E", "v_T f_T", "v_E f_I", "d_T", "d_I", "d_E", "beta", "I_sigma"],
        edges: &[("v_T", "v_E f_I"), ("v_I", "v_T f_T"), ("d_T", "v_T f_T"), ("d_I", "v_E f_I"), ("d_E", "v_I f_E"), ("beta", "v_T f_T"), ("beta", "v_E f_I"), ("I_sigma", "v_T f_T")],
    },
    Golden {
        model: "viral",
        mode: Mode::Dynamic,
        clusters: &["v_T v_I v_E g_T g_I g_E", "d_T", "d_I", "d_E", "beta", "I_sigma"],
        edges: &[("d_T", "v_T v_I v_E g_T g_I g_E"), ("d_I", "v_T v_I v_E g_T g_I g_E"), ("d_E", "v_T v_I v_E g_T g_I g_E"), ("beta", "v_T v_I v_E g_T g_I g_E"), ("I_sigma", "v_T v_I v_E g_T g_I g_E")],
    },
    Golden {
        model: "nfbn",
        mode: Mode::Equilibrium,
        clusters: &["v_A f_A", "v_C f_B", "v_B f_C", "k_IA", "k_CB", "k_AC", "I"],
        edges: &[("v_A", "v_B f_C"), ("v_C", "v_B f_C"), ("k_IA", "v_A f_A"), ("k_CB", "v_C f_B"), ("k_AC", "v_B f_C"), ("I", "v_A f_A")],
    },
    Golden {
        model: "nfbn",
        mode: Mode::Dynamic,
        clusters: &["v_A g_A", "v_B v_C g_B g_C", "k_IA", "k_CB", "k_AC", "I"],
        edges: &[("v_A", "v_B v_C g_B g_C"), ("k_IA", "v_A g_A"), ("k_CB", "v_B v_C g_B g_C"), ("k_AC", "v_B v_C g_B g_C"), ("I", "v_A g_A")],
    },
    Golden {
        model: "protein",
        mode: Mode::Equilibrium,
        clusters: &["v_m f_e", "v_r f_m", "v_s f_r", "v_e f_s", "F_s", "F_r", "F_m", "F_e", "I"],
        edges: &[("v_s", "v_e f_s"), ("v_r", "v_s f_r"), ("v_m", "v_r f_m"), ("F_s", "v_e f_s"), ("F_r", "v_s f_r"), ("F_m", "v_r f_m"), ("F_e", "v_m f_e"), ("I", "v_e f_s")],
    },
    Golden {
        model: "protein",
        mode: Mode::Dynamic,
        clusters: &["v_s v_r v_m v_e g_s g_r g_m g_e", "F_s", "F_r", "F_m", "F_e", "I"],
        edges: &[("F_s", "v_s v_r v_m v_e g_s g_r g_m g_e"), ("F_r", "v_s v_r v_m v_e g_s g_r g_m g_e"), ("F_m", "v_s v_r v_m v_e g_s g_r g_m g_e"), ("F_e", "v_s v_r v_m v_e g_s g_r g_m g_e"), ("I", "v_s v_r v_m v_e g_s g_r g_m g_e")],
    },
    Golden {
        model: "enzyme",
        mode: Mode::Dynamic,
        clusters: &["v_S v_C v_E g_S g_C g_E", "v_P g_P", "k_1"],
        edges: &[("v_C", "v_P g_P"), ("k_1", "v_S v_C v_E g_S g_C g_E")],
    },
    Golden {
        model: "enzyme_rewritten",
        mode: Mode::Equilibrium,
        clusters: &["v_C f_C'", "v_E f_CE", "v_S f_S", "v_P f_P", "k_1"],
        edges: &[("v_C", "v_E f_CE"), ("v_C", "v_S f_S"), ("v_C", "v_P f_P"), ("v_E", "v_S f_S"), ("k_1", "v_S f_S")],
    },
    Golden {
        model: "enzyme_rewritten",
        mode: Mode::Dynamic,
        clusters: &["v_S v_C v_E g_S g_C g_E", "v_P g_P", "k_1"],
        edges: &[("v_C", "v_P g_P"), ("k_1", "v_S v_C v_E g_S g_C g_E")],
    },
    Golden {
        model: "ifflp",
        mode: Mode::Equilibrium,
        clusters: &["v_A f_A", "v_B f_B", "v_C f_C", "I"],
        edges: &[("v_A", "v_B f_B"), ("v_A", "v_C f_C"), ("v_B", "v_C f_C"), ("I", "v_A f_A")],
    },
    Golden {
        model: "ifflp",
        mode: Mode::Dynamic,
        clusters: &["v_A g_A", "v_B g_B", "v_C g_C", "I"],
        edges: &[("v_A", "v_B g_B"), ("v_A", "v_C g_C"), ("v_B", "v_C g_C"), ("I", "v_A g_A")],
    },
    Golden {
        model: "ifflp_rewritten",
        mode: Mode::Equilibrium,
        clusters: &["v_A f_A", "v_R f_R", "v_C f_C'", "I"],
        edges: &[("v_R", "v_C f_C'"), ("I", "v_A f_A")],
    },
    Golden {
        model: "ifflp_rewritten",
        mode: Mode::Dynamic,
        clusters: &["v_A f_A", "v_R f_R", "v_C f_C'", "I"],
        edges: &[("v_R", "v_C f_C'"), ("I", "v_A f_A")],
    },
];

/// Causal ordering graph of a corpus model; the dynamic one uses the natural matching.
pub fn cog(model: &str, mode: Mode) -> Result<CausalOrderingGraph, GraphError> {
    let m = corpus::model(model).expect("corpus model");
    match mode {
        Mode::Equilibrium => causal_ordering(&BipartiteSystem::from_system(&equilibrium_system(&m), &m)?),
        Mode::Dynamic => {
            let b = BipartiteSystem::from_system(&dynamic_system(&m), &m)?;
            let nat = natural_matching(&b).expect("natural matching");
            causal_ordering_with(&b, &nat)
        }
    }
}

fn cluster_label(cog: &CausalOrderingGraph, k: usize) -> String {
    let names: Vec<String> = cog.clusters[k].members.iter().map(|&v| cog.vertex_name(v)).collect();
    names.join(" ")
}

pub fn clusters_of(cog: &CausalOrderingGraph) -> BTreeSet<String> {
    (0..cog.clusters.len()).map(|k| cluster_label(cog, k)).collect()
}

pub fn edges_of(cog: &CausalOrderingGraph) -> BTreeSet<(String, String)> {
    cog.edges.iter().map(|&(v, k)| (cog.vertex_name(v), cluster_label(cog, k))).collect()
}

/// Markov ordering graph expected from a golden: every edge into a cluster becomes
/// an edge into each of its variables.
pub fn golden_mog_edges(g: &Golden) -> BTreeSet<(String, String)> {
    g.edges
        .iter()
        .flat_map(|&(src, target)| {
            target.split(' ').filter(|n| n.starts_with("v_")).map(move |w| (src.to_string(), w.to_string()))
        })
        .collect()
}

pub fn mog_edges(mog: &MarkovOrderingGraph) -> BTreeSet<(String, String)> {
    mog.edges().into_iter().map(|(a, b)| (mog.nodes[a].name.clone(), mog.nodes[b].name.clone())).collect()
}

/// Compares a model's graphs against a golden; returns a description of the first
/// difference.
pub fn check_golden(g: &Golden) -> Result<(), String> {
    let cog = cog(g.model, g.mode).map_err(|e| format!("{} {:?}: {e}", g.model, g.mode))?;
    let want: BTreeSet<String> = g.clusters.iter().map(|s| s.to_string()).collect();
    let got = clusters_of(&cog);
    if got != want {
        return Err(format!("{} {:?} clusters: got {got:?}, want {want:?}", g.model, g.mode));
    }
    let want: BTreeSet<(String, String)> = g.edges.iter().map(|&(a, b)| (a.to_string(), b.to_string())).collect();
    let got = edges_of(&cog);
    if got != want {
        return Err(format!("{} {:?} edges: got {got:?}, want {want:?}", g.model, g.mode));
    }
    let mog = markov_ordering(&cog);
    let (got, want) = (mog_edges(&mog), golden_mog_edges(g));
    if got != want {
        return Err(format!("{} {:?} Markov edges: got {got:?}, want {want:?}", g.model, g.mode));
    }
    if !mog.is_acyclic() {
        return Err(format!("{} {:?} Markov ordering graph has a cycle", g.model, g.mode));
    }
    Ok(())
}

/// d-separation by enumerating every simple path of the skeleton and checking
/// whether some vertex on it blocks it.
pub fn brute_force_dsep(n: usize, edges: &[(usize, usize)], a: usize, b: usize, z: &[usize]) -> bool {
    let mut adj = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
        children[u].push(v);
    }
    let has_edge = |u: usize, v: usize| edges.contains(&(u, v));
    let mut desc_in_z = vec![false; n];
    for (v, flag) in desc_in_z.iter_mut().enumerate() {
        let mut stack = vec![v];
        let mut seen = vec![false; n];
        seen[v] = true;
        while let Some(x) = stack.pop() {
            if z.contains(&x) {
                *flag = true;
            }
            for &c in &children[x] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
    }
    fn walk(
        path: &mut Vec<usize>,
        b: usize,
        adj: &[Vec<usize>],
        open: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let last = *path.last().unwrap();
        if last == b {
            return open(path);
        }
        for &next in &adj[last] {
            if !path.contains(&next) {
                path.push(next);
                let found = walk(path, b, adj, open);
                path.pop();
                if found {
                    return true;
                }
            }
        }
        false
    }
    let open = |path: &[usize]| {
        path.windows(3).all(|w| {
            let collider = has_edge(w[0], w[1]) && has_edge(w[2], w[1]);
            if collider {
                desc_in_z[w[1]]
            } else {
                !z.contains(&w[1])
            }
        })
    };
    !walk(&mut vec![a], b, &adj, &open)
}

/// Implied (in)dependences of the protein pathway: (i, j, conditioning column, d-separated).
pub const PROTEIN_CI_TABLE: &[(&str, &str, Option<&str>, bool)] = &[
    ("I", "s", None, true),
    ("I", "r", None, true),
    ("I", "m", None, true),
    ("I", "e", None, false),
    ("s", "r", None, false),
    ("s", "m", None, false),
    ("s", "e", None, false),
    ("r", "m", None, false),
    ("r", "e", None, false),
    ("m", "e", None, false),
    ("I", "s", Some("r"), true),
    ("I", "s", Some("m"), true),
    ("I", "r", Some("s"), true),
    ("I", "r", Some("m"), true),
    ("I", "m", Some("s"), true),
    ("I", "m", Some("r"), true),
    ("e", "r", Some("s"), true),
    ("e", "m", Some("s"), true),
    ("e", "m", Some("r"), true),
    ("s", "m", Some("r"), true),
    ("I", "e", Some("s"), false),
    ("I", "e", Some("r"), false),
    ("I", "e", Some("m"), false),
    ("I", "s", Some("e"), false),
    ("I", "r", Some("e"), false),
    ("I", "m", Some("e"), false),
    ("e", "s", Some("r"), false),
    ("e", "s", Some("m"), false),
    ("e", "s", Some("I"), false),
    ("e", "r", Some("m"), false),
    ("e", "r", Some("I"), false),
    ("e", "m", Some("I"), false),
    ("s", "r", Some("I"), false),
    ("s", "r", Some("e"), false),
    ("s", "r", Some("m"), false),
    ("s", "m", Some("I"), false),
    ("s", "m", Some("e"), false),
    ("r", "m", Some("I"), false),
    ("r", "m", Some("e"), false),
    ("r", "m", Some("s"), false),
];

/// The LCD triples expected in the protein pathway, as (x, y) pairs.
pub const LCD_EXPECTED: &[(&str, &str)] = &[("m", "e"), ("m", "r"), ("m", "s"), ("r", "e"), ("r", "s"), ("s", "e")];

pub const SAMPLE_SIZE: usize = 500;
pub const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const ALPHA: f64 = 0.01;

pub fn sample_config() -> SimConfig {
    SimConfig { dt: 0.02, ..SimConfig::default() }
}

pub fn input_distribution() -> Distribution {
    Distribution::Uniform(1.2, 1.6)
}

/// Protein equilibria with the input randomised alongside the phosphatase levels.
pub fn protein_ci_dataset(seed: u64) -> Dataset {
    let m = corpus::model("protein").unwrap();
    sample_equilibria(&m, SAMPLE_SIZE, seed, &sample_config(), &[("I".into(), input_distribution())]).unwrap()
}

/// Protein equilibria with context `k_me`, random `k_Fee` and fixed `F_e`.
pub fn lcd_dataset(seed: u64) -> Dataset {
    let m = corpus::model("protein").unwrap().with_exogenous("F_e", Distribution::Constant(0.7)).unwrap();
    let overrides = [
        ("k_me".to_string(), Distribution::Uniform(0.98, 1.1)),
        ("k_Fee".to_string(), Distribution::Uniform(0.7, 1.0)),
        ("I".to_string(), input_distribution()),
    ];
    sample_equilibria(&m, SAMPLE_SIZE, seed, &sample_config(), &overrides).unwrap()
}
