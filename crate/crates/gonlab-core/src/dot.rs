//! DOT export for visualization; edge lengths appear as labels.

use std::fmt::Write;

use crate::graph::MetricGraph;

pub fn graph_to_dot(g: &MetricGraph) -> String {
    let mut out = String::from("graph {\n");
    for v in g.vertex_ids() {
        writeln!(out, "    \"{v}\";").unwrap();
    }
    for e in g.edge_ids() {
        let (a, b) = g.edge_ends(e).expect("edge exists");
        let len = g.edge_length(e).expect("edge exists");
        writeln!(out, "    \"{a}\" -- \"{b}\" [label=\"{len}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}
