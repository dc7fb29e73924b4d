//! Graphviz export. Inputs are boxes, internal nodes ellipses labelled
//! with their operation, outputs double circles attached by dashed
//! edges; child edges carry their argument position. Node order is
//! deterministic so exports diff cleanly.

use std::fmt::Write as _;
use tg_core::ConcreteTermGraph;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(graph: &ConcreteTermGraph, outputs: &[(String, String)]) -> String {
    let mut out = String::from("digraph termgraph {\n  rankdir=TB;\n");
    for (name, _) in graph.inputs().iter() {
        let _ = writeln!(out, "  \"{}\" [shape=box];", escape(name));
    }
    for (name, def) in graph.nodes() {
        let _ = writeln!(
            out,
            "  \"{}\" [shape=ellipse, label=\"{}\"];",
            escape(name),
            escape(def.op.name())
        );
    }
    for (name, def) in graph.nodes() {
        for (i, child) in def.children.iter().enumerate() {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                escape(name),
                escape(child),
                i + 1
            );
        }
    }
    for (name, node) in outputs {
        let id = format!("out:{name}");
        let _ = writeln!(
            out,
            "  \"{}\" [shape=doublecircle, label=\"{}\"];",
            escape(&id),
            escape(name)
        );
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [style=dashed];",
            escape(&id),
            escape(node)
        );
    }
    out.push_str("}\n");
    out
}
