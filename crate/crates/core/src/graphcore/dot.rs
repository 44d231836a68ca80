//! Graphviz DOT and CSV renderings with stable node and edge order.

use std::fmt::Write;

use super::{CausalOrderingGraph, MarkovOrderingGraph, NodeKind, OrientedGraph, Vertex};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn oriented_name(g: &OrientedGraph, v: Vertex) -> String {
    match v {
        Vertex::Variable(i) => super::variable_label(&g.variables[i]),
        Vertex::Equation(i) => g.equations[i].clone(),
        Vertex::Exogenous(i) | Vertex::Input(i) => format!("#{i}"),
    }
}

pub fn oriented_to_dot(g: &OrientedGraph, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {} {{", quote(name)).unwrap();
    for v in &g.variables {
        writeln!(s, "  {} [shape=circle];", quote(&super::variable_label(v))).unwrap();
    }
    for f in &g.equations {
        writeln!(s, "  {} [shape=box];", quote(f)).unwrap();
    }
    for &(a, b) in &g.arcs {
        writeln!(s, "  {} -> {};", quote(&oriented_name(g, a)), quote(&oriented_name(g, b))).unwrap();
    }
    s.push_str("}\n");
    s
}

/// Endogenous clusters become `subgraph cluster_<k>` boxes; edges into a cluster point
/// at its first member with `lhead` set.
pub fn cog_to_dot(cog: &CausalOrderingGraph, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {} {{", quote(name)).unwrap();
    s.push_str("  compound=true;\n");
    for (k, c) in cog.clusters.iter().enumerate() {
        if c.is_endogenous() {
            writeln!(s, "  subgraph cluster_{k} {{").unwrap();
            for &v in &c.members {
                let shape = if matches!(v, Vertex::Variable(_)) { "circle" } else { "box" };
                writeln!(s, "    {} [shape={shape}];", quote(&cog.vertex_name(v))).unwrap();
            }
            s.push_str("  }\n");
        } else {
            let v = c.members[0];
            let style = if matches!(v, Vertex::Input(_)) { "shape=diamond" } else { "shape=circle, style=dashed" };
            writeln!(s, "  {} [{style}];", quote(&cog.vertex_name(v))).unwrap();
        }
    }
    for &(src, target) in &cog.edges {
        let head = cog.clusters[target].members[0];
        writeln!(
            s,
            "  {} -> {} [lhead=cluster_{target}];",
            quote(&cog.vertex_name(src)),
            quote(&cog.vertex_name(head))
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}

pub fn mog_to_dot(mog: &MarkovOrderingGraph, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {} {{", quote(name)).unwrap();
    for n in &mog.nodes {
        let style = match n.kind {
            NodeKind::Variable(_) => "shape=circle",
            NodeKind::Exogenous(_) => "shape=circle, style=dashed",
            NodeKind::Input(_) => "shape=diamond",
        };
        writeln!(s, "  {} [{style}];", quote(&n.name)).unwrap();
    }
    for (a, b) in mog.edges() {
        writeln!(s, "  {} -> {};", quote(&mog.nodes[a].name), quote(&mog.nodes[b].name)).unwrap();
    }
    s.push_str("}\n");
    s
}

/// One `cluster` row per cluster (members space separated) and one `edge` row per
/// edge (source vertex, target cluster index).
pub fn cog_to_csv(cog: &CausalOrderingGraph) -> String {
    let mut s = String::from("record,source,target\n");
    for (k, c) in cog.clusters.iter().enumerate() {
        let members: Vec<String> = c.members.iter().map(|&v| cog.vertex_name(v)).collect();
        writeln!(s, "cluster,{},{k}", members.join(" ")).unwrap();
    }
    for &(src, target) in &cog.edges {
        writeln!(s, "edge,{},{target}", cog.vertex_name(src)).unwrap();
    }
    s
}

pub fn mog_to_csv(mog: &MarkovOrderingGraph) -> String {
    let mut s = String::from("source,target\n");
    for (a, b) in mog.edges() {
        writeln!(s, "{},{}", mog.nodes[a].name, mog.nodes[b].name).unwrap();
    }
    s
}
