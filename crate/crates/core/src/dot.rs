//! Graphviz DOT rendering.

use std::fmt::Write as _;

use crate::regions::Region;
use crate::synthesis::ElementaryNetSystem;
use crate::ts::System;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One digraph for a transition system or union; components become
/// clusters when there is more than one. States of `highlight` are shaded
/// gray and the initial state(s) get a double outline.
pub fn ts_to_dot(sys: &System, highlight: Option<&Region>) -> String {
    let mut out = String::from("digraph ts {\n  rankdir=LR;\n  node [shape=circle];\n");
    let clustered = sys.components().len() > 1;
    for (ci, comp) in sys.components().iter().enumerate() {
        let indent = if clustered {
            let _ = writeln!(
                out,
                "  subgraph cluster_{ci} {{\n    label={};",
                quote(comp.name())
            );
            "    "
        } else {
            "  "
        };
        for s in comp.states() {
            let mut attrs = Vec::new();
            if s == comp.initial() {
                attrs.push("peripheries=2".to_string());
            }
            if highlight.is_some_and(|r| r.contains(s)) {
                attrs.push("style=filled".to_string());
                attrs.push("fillcolor=gray".to_string());
            }
            let name = quote(sys.state_name(s));
            if attrs.is_empty() {
                let _ = writeln!(out, "{indent}{name};");
            } else {
                let _ = writeln!(out, "{indent}{name} [{}];", attrs.join(", "));
            }
        }
        if clustered {
            out.push_str("  }\n");
        }
    }
    for edge in sys.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(sys.state_name(edge.source)),
            quote(sys.state_name(edge.target)),
            quote(sys.event_name(edge.event))
        );
    }
    out.push_str("}\n");
    out
}

/// Places as circles (marked places filled), transitions as boxes.
pub fn ens_to_dot(ens: &ElementaryNetSystem) -> String {
    let mut out = String::from("digraph ens {\n  rankdir=LR;\n");
    for (p, name) in ens.places().iter().enumerate() {
        let fill = if ens.initial().contains(p) {
            ", style=filled, fillcolor=black, fontcolor=white"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  {} [shape=circle{fill}];",
            quote(&format!("place:{name}"))
        );
    }
    for name in ens.transitions() {
        let _ = writeln!(
            out,
            "  {} [shape=box, label={}];",
            quote(&format!("transition:{name}")),
            quote(name)
        );
    }
    for (t, name) in ens.transitions().iter().enumerate() {
        let tn = quote(&format!("transition:{name}"));
        for p in ens.inputs(t).ones() {
            let _ = writeln!(
                out,
                "  {} -> {tn};",
                quote(&format!("place:{}", ens.places()[p]))
            );
        }
        for p in ens.outputs(t).ones() {
            let _ = writeln!(
                out,
                "  {tn} -> {};",
                quote(&format!("place:{}", ens.places()[p]))
            );
        }
    }
    out.push_str("}\n");
    out
}
