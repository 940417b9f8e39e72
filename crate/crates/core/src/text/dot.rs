//! DOT (Graphviz) export of an e-graph: one dotted cluster per e-class,
//! one box per e-node, and edges from e-nodes to the clusters of their
//! e-class operands.

use std::fmt::Write;

use crate::ir::{AttrValue, Diagnostic, Module, OpId, Producer, ValueId};

/// Renders the e-graph held by `egraph` (an `eqsat.egraph` operation)
/// as a DOT digraph. Output is deterministic: clusters follow e-class
/// block order, nodes follow operand order.
pub fn emit_dot(m: &Module, egraph: OpId) -> Result<String, Diagnostic> {
    if m.op(egraph).name() != "eqsat.egraph" {
        return Err(Diagnostic::for_op(
            m,
            egraph,
            format!("expected an eqsat.egraph operation, found `{}`", m.op(egraph).name()),
        ));
    }
    let block = m.op(egraph).regions()[0].block;
    let eclasses: Vec<OpId> = m
        .block_ops(block)
        .iter()
        .copied()
        .filter(|&o| m.op(o).name() == "eqsat.eclass")
        .collect();

    // e-class result -> cluster index
    let cluster_of = |v: ValueId| -> Option<usize> {
        eclasses.iter().position(|&c| m.op(c).results().first() == Some(&v))
    };

    let mut out = String::new();
    out.push_str("digraph egraph {\n");
    out.push_str("  compound = true;\n");
    out.push_str("  node [shape = box];\n");
    let mut edges = Vec::new();
    for (ci, &eclass) in eclasses.iter().enumerate() {
        writeln!(out, "  subgraph cluster_{ci} {{").unwrap();
        out.push_str("    style = dotted;\n");
        for (ni, &enode) in m.op(eclass).operands().iter().enumerate() {
            writeln!(out, "    n{ci}_{ni} [label = \"{}\"];", enode_label(m, enode)).unwrap();
            if let Some(def) = m.defining_op(enode) {
                for &operand in m.op(def).operands() {
                    if let Some(target) = cluster_of(operand) {
                        edges.push(format!(
                            "  n{ci}_{ni} -> n{target}_0 [lhead = cluster_{target}];"
                        ));
                    }
                }
            }
        }
        out.push_str("  }\n");
    }
    for edge in edges {
        out.push_str(&edge);
        out.push('\n');
    }
    out.push_str("}\n");
    Ok(out)
}

/// Label for one e-node: the producing operation's name plus its
/// attributes, or `argN` for function arguments from outside.
fn enode_label(m: &Module, enode: ValueId) -> String {
    match m.producer(enode) {
        Producer::BlockArg { index, .. } => format!("arg{index}"),
        Producer::OpResult { op, .. } => {
            let data = m.op(op);
            let mut label = data.name().to_string();
            for (key, value) in data.attrs() {
                let rendered = match value {
                    AttrValue::Int(i) => i.to_string(),
                    AttrValue::Str(s) => s.clone(),
                    AttrValue::Type(t) => t.token().to_string(),
                };
                write!(label, " {key}={}", escape_label(&rendered)).unwrap();
            }
            label
        }
    }
}

fn escape_label(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}
